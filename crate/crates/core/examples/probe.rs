use num_complex::Complex64;
use siegert::bessel::{outgoing_vl, outgoing_vl_deriv};
use siegert::exact::{find_siegert_state, matching_function};
use siegert::potentials::{well_barrier, WellBarrierParams};

fn main() {
    let pot = well_barrier(WellBarrierParams { v0: 0.3, delta: 5.0, r0: 6.0, lambda: 0.5 }).unwrap();
    for guess_re in [-0.0473f64, -0.01404, -0.00836] {
        match find_siegert_state(&pot, 1, Complex64::new(guess_re, -1e-6), 1e-12) {
            Ok(st) => {
                let e = st.energy.0;
                // evaluate the pieces of the Wronskian residual by finite re-propagation:
                // w(E) = f(E) * u(r0) * v; measure f on a shrinking pencil to estimate floor
                let f = matching_function(&pot, 1, e).unwrap();
                let k = (2.0 * e).sqrt();
                let v = outgoing_vl(1, k, 6.0);
                let dv = outgoing_vl_deriv(1, k, 6.0);
                let lext = Complex64::i() * k + dv / v;
                println!("root near {guess_re}: E = {e}");
                println!("   |f| = {:.3e}  residual(stored) = {:.3e}  L_ext = {lext}", f.norm(), st.residual);
                // derivative of f along real E (finite difference, large-ish step to beat noise)
                let h = 1e-8;
                let fp = matching_function(&pot, 1, e + Complex64::new(h, 0.0)).unwrap();
                let fm = matching_function(&pot, 1, e - Complex64::new(h, 0.0)).unwrap();
                println!("   |df/dE| ~ {:.3e}", ((fp - fm) / (2.0 * h)).norm());
                // continuity of the assembled wavefunction + interior norm + flux
                println!("   continuity defect = {:.3e}", st.wavefunction.continuity_defect());
                let (u, du) = st.wavefunction.eval_with_deriv(6.0);
                println!("   u(r0) = {u}, u'(r0) = {du}, u'/u = {}", du / u);
                println!("   class = {:?}", st.class);
            }
            Err(e) => println!("root near {guess_re}: {e}"),
        }
    }
}
