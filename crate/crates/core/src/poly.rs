//! Sparse multilinear polynomials with exact gradients.

#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    /// Distinct variable indices.
    pub vars: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Polynomial {
    pub monomials: Vec<Monomial>,
}

impl Polynomial {
    pub fn linear(terms: impl IntoIterator<Item = (usize, f64)>) -> Self {
        Self { monomials: terms.into_iter().map(|(v, c)| Monomial { coeff: c, vars: vec![v] }).collect() }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.monomials.iter().map(|m| m.coeff * m.vars.iter().map(|&v| x[v]).product::<f64>()).sum()
    }

    /// Adds the gradient at `x` into `out`.
    pub fn add_gradient(&self, x: &[f64], out: &mut [f64]) {
        for m in &self.monomials {
            for (pos, &v) in m.vars.iter().enumerate() {
                let rest: f64 = m.vars.iter().enumerate().filter(|&(q, _)| q != pos).map(|(_, &w)| x[w]).product();
                out[v] += m.coeff * rest;
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        self.add_gradient(x, &mut g);
        g
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.monomials.iter().map(|m| m.coeff.abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_gradient() {
        // 2xy - 3z + xz
        let p = Polynomial {
            monomials: vec![
                Monomial { coeff: 2.0, vars: vec![0, 1] },
                Monomial { coeff: -3.0, vars: vec![2] },
                Monomial { coeff: 1.0, vars: vec![0, 2] },
            ],
        };
        let x = [1.5, -2.0, 0.5];
        assert_eq!(p.eval(&x), 2.0 * 1.5 * -2.0 - 1.5 + 0.75);
        assert_eq!(p.gradient(&x), vec![-4.0 + 0.5, 3.0, -3.0 + 1.5]);
    }
}
