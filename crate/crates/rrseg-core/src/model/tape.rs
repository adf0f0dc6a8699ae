//! Tape-based reverse-mode automatic differentiation over scalars.
//!
//! The forward pass records a Wengert list: each node stores its value, its
//! (at most two) parents, and the local partial derivatives, all computed
//! eagerly. [`Var::backward`] then runs a single reverse sweep accumulating
//! adjoints. Variables are `Copy` handles borrowing the tape, so the generic
//! model code treats them exactly like `f64`.

use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::ops::{Add, Div, Mul, Neg, Sub};

use super::scalar::Scalar;
use crate::math;

#[derive(Clone, Copy)]
struct Node {
    parents: [u32; 2],
    partials: [f64; 2],
    value: f64,
}

/// Records every scalar operation of one forward evaluation.
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Self {
            nodes: RefCell::new(Vec::new()),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn push(&self, value: f64, parents: [u32; 2], partials: [f64; 2]) -> u32 {
        let mut nodes = self.nodes.borrow_mut();
        let id = nodes.len();
        assert!(id < u32::MAX as usize, "tape overflow");
        nodes.push(Node {
            parents,
            partials,
            value,
        });
        id as u32
    }

    /// A new leaf variable (gradients are reported against leaves).
    pub fn var(&self, value: f64) -> Var<'_> {
        let id = self.push(value, [0, 0], [0.0, 0.0]);
        // Leaves point at themselves with zero partials so the backward
        // sweep needs no special casing.
        self.nodes.borrow_mut()[id as usize].parents = [id, id];
        Var { tape: self, id }
    }
}

/// A differentiable scalar on a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    id: u32,
}

impl<'t> Var<'t> {
    pub fn id(self) -> u32 {
        self.id
    }

    fn unary(self, value: f64, partial: f64) -> Var<'t> {
        let id = self.tape.push(value, [self.id, self.id], [partial, 0.0]);
        Var {
            tape: self.tape,
            id,
        }
    }

    fn binary(self, rhs: Var<'t>, value: f64, da: f64, db: f64) -> Var<'t> {
        debug_assert!(
            core::ptr::eq(self.tape, rhs.tape),
            "vars from different tapes"
        );
        let id = self.tape.push(value, [self.id, rhs.id], [da, db]);
        Var {
            tape: self.tape,
            id,
        }
    }

    /// Reverse sweep seeding this node's adjoint with 1.
    pub fn backward(self) -> Gradients {
        let nodes = self.tape.nodes.borrow();
        let mut adjoints = vec![0.0; nodes.len()];
        adjoints[self.id as usize] = 1.0;
        for i in (0..nodes.len()).rev() {
            let adj = adjoints[i];
            if adj == 0.0 {
                continue;
            }
            let node = &nodes[i];
            for k in 0..2 {
                let p = node.parents[k] as usize;
                if p != i {
                    adjoints[p] += adj * node.partials[k];
                }
            }
        }
        Gradients { adjoints }
    }
}

/// Adjoints of every tape node after a backward sweep.
pub struct Gradients {
    adjoints: Vec<f64>,
}

impl Gradients {
    pub fn wrt(&self, var: Var<'_>) -> f64 {
        self.adjoints[var.id() as usize]
    }

    pub fn wrt_id(&self, id: u32) -> f64 {
        self.adjoints[id as usize]
    }
}

impl<'t> Add for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: Var<'t>) -> Var<'t> {
        self.binary(rhs, self.val() + rhs.val(), 1.0, 1.0)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: Var<'t>) -> Var<'t> {
        self.binary(rhs, self.val() - rhs.val(), 1.0, -1.0)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: Var<'t>) -> Var<'t> {
        self.binary(rhs, self.val() * rhs.val(), rhs.val(), self.val())
    }
}

impl<'t> Div for Var<'t> {
    type Output = Var<'t>;
    fn div(self, rhs: Var<'t>) -> Var<'t> {
        let b = rhs.val();
        self.binary(rhs, self.val() / b, 1.0 / b, -self.val() / (b * b))
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    fn neg(self) -> Var<'t> {
        self.unary(-self.val(), -1.0)
    }
}

impl<'t> Scalar for Var<'t> {
    fn val(self) -> f64 {
        self.tape.nodes.borrow()[self.id as usize].value
    }

    fn lift(self, c: f64) -> Self {
        self.tape.var(c)
    }

    fn add_const(self, c: f64) -> Self {
        self.unary(self.val() + c, 1.0)
    }

    fn mul_const(self, c: f64) -> Self {
        self.unary(self.val() * c, c)
    }

    fn exp(self) -> Self {
        let value = math::exp(self.val());
        self.unary(value, value)
    }

    fn ln(self) -> Self {
        let x = self.val();
        self.unary(math::ln(x), 1.0 / x)
    }

    fn sqrt(self) -> Self {
        let value = math::sqrt(self.val());
        self.unary(value, 0.5 / value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let tape = Tape::new();
        let x = tape.var(3.0);
        let y = x * x;
        assert_eq!(y.val(), 9.0);
        let grads = y.backward();
        assert_eq!(grads.wrt(x), 6.0);
    }

    #[test]
    fn composite_expression() {
        // f(a, b) = (a + b) * exp(a) / b at a = 0.5, b = 2.
        let tape = Tape::new();
        let a = tape.var(0.5);
        let b = tape.var(2.0);
        let f = (a + b) * a.exp() / b;
        let grads = f.backward();
        let ea = math::exp(0.5);
        // df/da = exp(a) (1 + a + b) / b, df/db = exp(a) (b - a - b) / b^2.
        assert!((grads.wrt(a) - ea * 3.5 / 2.0).abs() < 1e-12);
        assert!((grads.wrt(b) - ea * (-0.5) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn transcendentals() {
        let tape = Tape::new();
        let x = tape.var(1.7);
        let f = x.ln() + x.sqrt();
        let grads = f.backward();
        let expected = 1.0 / 1.7 + 0.5 / math::sqrt(1.7);
        assert!((grads.wrt(x) - expected).abs() < 1e-12);
    }

    #[test]
    fn constants_do_not_leak_gradient() {
        let tape = Tape::new();
        let x = tape.var(2.0);
        let c = x.lift(10.0);
        let f = x * c;
        let grads = f.backward();
        assert_eq!(grads.wrt(x), 10.0);
        assert_eq!(grads.wrt(c), 2.0);
    }

    #[test]
    fn sigmoid_matches_closed_form() {
        let tape = Tape::new();
        let x = tape.var(0.3);
        let s = x.sigmoid();
        let grads = s.backward();
        let sv = math::sigmoid(0.3);
        assert!((s.val() - sv).abs() < 1e-15);
        assert!((grads.wrt(x) - sv * (1.0 - sv)).abs() < 1e-12);
    }

    #[test]
    fn fanout_accumulates() {
        let tape = Tape::new();
        let x = tape.var(4.0);
        let y = x * x + x.mul_const(3.0);
        let grads = y.backward();
        assert_eq!(grads.wrt(x), 11.0);
    }
}
