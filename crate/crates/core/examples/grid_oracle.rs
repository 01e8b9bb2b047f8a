//! Exhaustive lattice search for the synthetic surrogate's optimum.
//!
//! Enumerates n_turns over its full integer lattice and every continuous
//! dimension over 9 evenly spaced normalized points (0, 1/8, ..., 1), then
//! reports the best value and its location. The printed value is the
//! reference optimum frozen into the acceptance suite.
//!
//! Run with: cargo run --release -p helixlab-core --example grid_oracle

use helixlab_core::default_nanohelix_space;
use helixlab_core::surrogate::g_of_normalized;

const POINTS: usize = 9;
const N_TURNS_INDEX: usize = 5;

fn main() {
    let lattice: Vec<f64> = (0..POINTS).map(|k| k as f64 / (POINTS - 1) as f64).collect();
    let turns_lattice: Vec<f64> = (3..=10).map(|t| (t as f64 - 3.0) / 7.0).collect();

    let mut best = f64::NEG_INFINITY;
    let mut best_u = [0.0f64; 9];
    let mut u = [0.0f64; 9];

    fn descend(
        dim: usize,
        u: &mut [f64; 9],
        lattice: &[f64],
        turns_lattice: &[f64],
        best: &mut f64,
        best_u: &mut [f64; 9],
    ) {
        if dim == 9 {
            let g = g_of_normalized(u);
            if g > *best {
                *best = g;
                *best_u = *u;
            }
            return;
        }
        let values = if dim == N_TURNS_INDEX {
            turns_lattice
        } else {
            lattice
        };
        for &v in values {
            u[dim] = v;
            descend(dim + 1, u, lattice, turns_lattice, best, best_u);
        }
    }

    descend(0, &mut u, &lattice, &turns_lattice, &mut best, &mut best_u);

    println!("lattice: {POINTS} points per continuous dim, n_turns enumerated");
    println!("optimum g* = {best:.15}");
    let space = default_nanohelix_space();
    println!("argmax (normalized / raw):");
    for (dim, &uv) in space.dims().iter().zip(best_u.iter()) {
        let x = dim.lower + uv * (dim.upper - dim.lower);
        println!("  {:<20} u = {:>8.5}  x = {:.6}", dim.name, uv, x);
    }
}
