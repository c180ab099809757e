//! Base-field arithmetic and univariate polynomials over `F_q`, including the
//! structure of `x^n - 1`.

mod cyclotomic;
mod factor;
mod field;
pub mod linalg;
mod poly;

pub use cyclotomic::{
    cyclotomic_cosets, cyclotomic_poly, degree_k_divisors, divisor_from_exponents, divisors_of_degree,
    exponents_of, factor_xn_minus_1, CosetPartition, Divisor,
};
pub use factor::{
    distinct_degree, equal_degree, factor, is_irreducible, least_irreducible, phi_q, squarefree,
    PolyFactorization,
};
pub use field::{BaseField, Fq};
pub use poly::Poly;
