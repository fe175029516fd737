//! Nested first-order forward mode as an independent oracle for higher
//! partials. `Nested<T>` is `re + eps·ε` over any scalar `T`; nesting `d`
//! levels deep, with one input direction per level, leaves the mixed partial
//! in the innermost `eps` of the outermost `eps`.

use std::marker::PhantomData;

use adkit::{Algebra, Elementary, FunctionDef};

pub trait Scalar: Clone {
    fn lit(c: f64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn recip(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn tan(&self) -> Self;
    /// Seeds input `i` at `c`, one level per entry of `dirs`.
    fn seed(c: f64, i: usize, dirs: &[usize]) -> Self;
    /// Coefficient of the product of all infinitesimals.
    fn top(&self) -> f64;
}

impl Scalar for f64 {
    fn lit(c: f64) -> Self {
        c
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn recip(&self) -> Self {
        1.0 / self
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn tan(&self) -> Self {
        f64::tan(*self)
    }
    fn seed(c: f64, _: usize, _: &[usize]) -> Self {
        c
    }
    fn top(&self) -> f64 {
        *self
    }
}

#[derive(Clone, Debug)]
pub struct Nested<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Scalar> Nested<T> {
    fn scaled(&self, re: T, factor: T) -> Self {
        Nested {
            re,
            eps: self.eps.mul(&factor),
        }
    }
}

impl<T: Scalar> Scalar for Nested<T> {
    fn lit(c: f64) -> Self {
        Nested {
            re: T::lit(c),
            eps: T::lit(0.0),
        }
    }
    fn add(&self, o: &Self) -> Self {
        Nested {
            re: self.re.add(&o.re),
            eps: self.eps.add(&o.eps),
        }
    }
    fn sub(&self, o: &Self) -> Self {
        Nested {
            re: self.re.sub(&o.re),
            eps: self.eps.sub(&o.eps),
        }
    }
    fn mul(&self, o: &Self) -> Self {
        Nested {
            re: self.re.mul(&o.re),
            eps: self.re.mul(&o.eps).add(&self.eps.mul(&o.re)),
        }
    }
    fn neg(&self) -> Self {
        Nested {
            re: self.re.neg(),
            eps: self.eps.neg(),
        }
    }
    fn recip(&self) -> Self {
        let r = self.re.recip();
        self.scaled(r.clone(), r.mul(&r).neg())
    }
    fn exp(&self) -> Self {
        let e = self.re.exp();
        self.scaled(e.clone(), e)
    }
    fn ln(&self) -> Self {
        self.scaled(self.re.ln(), self.re.recip())
    }
    fn sqrt(&self) -> Self {
        let s = self.re.sqrt();
        self.scaled(s.clone(), s.add(&s).recip())
    }
    fn sin(&self) -> Self {
        self.scaled(self.re.sin(), self.re.cos())
    }
    fn cos(&self) -> Self {
        self.scaled(self.re.cos(), self.re.sin().neg())
    }
    fn tan(&self) -> Self {
        let t = self.re.tan();
        self.scaled(t.clone(), T::lit(1.0).add(&t.mul(&t)))
    }
    fn seed(c: f64, i: usize, dirs: &[usize]) -> Self {
        let (last, inner) = dirs.split_last().expect("one direction per level");
        Nested {
            re: T::seed(c, i, inner),
            eps: T::lit(if *last == i { 1.0 } else { 0.0 }),
        }
    }
    fn top(&self) -> f64 {
        self.eps.top()
    }
}

pub struct NestedAlgebra<T>(PhantomData<T>);

impl<T: Scalar> Algebra for NestedAlgebra<T> {
    type Elem = T;

    fn constant(&self, c: f64) -> T {
        T::lit(c)
    }

    fn apply(&self, f: &Elementary, a: &[T]) -> adkit::Result<T> {
        Ok(match f {
            Elementary::Add => a[0].add(&a[1]),
            Elementary::Sub => a[0].sub(&a[1]),
            Elementary::Mul => a[0].mul(&a[1]),
            Elementary::Div => a[0].mul(&a[1].recip()),
            Elementary::Neg => a[0].neg(),
            Elementary::PowI(k) => {
                let mut acc = T::lit(1.0);
                for _ in 0..k.unsigned_abs() {
                    acc = acc.mul(&a[0]);
                }
                if *k < 0 {
                    acc.recip()
                } else {
                    acc
                }
            }
            Elementary::Exp => a[0].exp(),
            Elementary::Ln => a[0].ln(),
            Elementary::Sqrt => a[0].sqrt(),
            Elementary::Sin => a[0].sin(),
            Elementary::Cos => a[0].cos(),
            Elementary::Tan => a[0].tan(),
            Elementary::Identity => a[0].clone(),
            Elementary::Custom(_) => unimplemented!("custom functions"),
        })
    }
}

fn partial_at<T: Scalar>(def: &FunctionDef, c: &[f64], dirs: &[usize]) -> f64 {
    let inputs: Vec<T> = c.iter().enumerate().map(|(i, &x)| T::seed(x, i, dirs)).collect();
    def.eval_generic(&inputs, &NestedAlgebra::<T>(PhantomData)).unwrap()[0].top()
}

/// `∂^k f₁(c)` for `|k| ≤ 4` by nesting `|k|` levels of forward mode.
pub fn partial(def: &FunctionDef, c: &[f64], k: &[usize]) -> f64 {
    let dirs: Vec<usize> = k
        .iter()
        .enumerate()
        .flat_map(|(i, &ki)| std::iter::repeat_n(i, ki))
        .collect();
    type N1 = Nested<f64>;
    type N2 = Nested<N1>;
    type N3 = Nested<N2>;
    type N4 = Nested<N3>;
    match dirs.len() {
        0 => partial_at::<f64>(def, c, &dirs),
        1 => partial_at::<N1>(def, c, &dirs),
        2 => partial_at::<N2>(def, c, &dirs),
        3 => partial_at::<N3>(def, c, &dirs),
        4 => partial_at::<N4>(def, c, &dirs),
        d => panic!("nesting depth {d} not instantiated"),
    }
}
