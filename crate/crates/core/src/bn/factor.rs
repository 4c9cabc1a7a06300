//! Dense factors over discrete variables, row-major with the last variable fastest.

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Factor {
    pub vars: Vec<usize>,
    pub cards: Vec<usize>,
    pub values: Vec<f64>,
}

impl Factor {
    pub fn scalar(value: f64) -> Self {
        Factor { vars: Vec::new(), cards: Vec::new(), values: vec![value] }
    }

    pub fn contains(&self, var: usize) -> bool {
        self.vars.contains(&var)
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.vars.len()];
        for i in (0..self.vars.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.cards[i + 1];
        }
        strides
    }

    /// Fix `var = value` and drop it from the scope.
    pub fn reduce(&self, var: usize, value: usize) -> Factor {
        let Some(pos) = self.vars.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let strides = self.strides();
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        let outer = self.values.len() / (strides[pos] * self.cards[pos]);
        let inner = strides[pos];
        let mut values = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let base = o * inner * self.cards[pos] + value * inner;
            values.extend_from_slice(&self.values[base..base + inner]);
        }
        Factor { vars, cards, values }
    }

    /// Sum `var` out of the scope.
    pub fn sum_out(&self, var: usize) -> Factor {
        let Some(pos) = self.vars.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let strides = self.strides();
        let card = self.cards[pos];
        let inner = strides[pos];
        let outer = self.values.len() / (inner * card);
        let mut values = vec![0.0; outer * inner];
        for o in 0..outer {
            for k in 0..card {
                let src = &self.values[(o * card + k) * inner..(o * card + k + 1) * inner];
                for (dst, s) in values[o * inner..(o + 1) * inner].iter_mut().zip(src) {
                    *dst += s;
                }
            }
        }
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        Factor { vars, cards, values }
    }

    /// Pointwise product; the result scope is `self.vars` followed by the new variables of `other`.
    pub fn product(&self, other: &Factor) -> Factor {
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        for (&v, &c) in other.vars.iter().zip(&other.cards) {
            if !vars.contains(&v) {
                vars.push(v);
                cards.push(c);
            }
        }
        let size: usize = cards.iter().product();
        let self_strides = self.strides();
        let other_strides = other.strides();
        // Stride of each result variable inside each operand (0 when absent).
        let sa: Vec<usize> = vars
            .iter()
            .map(|v| self.vars.iter().position(|x| x == v).map_or(0, |p| self_strides[p]))
            .collect();
        let sb: Vec<usize> = vars
            .iter()
            .map(|v| other.vars.iter().position(|x| x == v).map_or(0, |p| other_strides[p]))
            .collect();
        let mut values = Vec::with_capacity(size);
        let mut counter = vec![0usize; vars.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..size {
            values.push(self.values[ia] * other.values[ib]);
            for d in (0..vars.len()).rev() {
                counter[d] += 1;
                ia += sa[d];
                ib += sb[d];
                if counter[d] < cards[d] {
                    break;
                }
                ia -= sa[d] * cards[d];
                ib -= sb[d] * cards[d];
                counter[d] = 0;
            }
        }
        Factor { vars, cards, values }
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Scale so the entries sum to one; all-zero factors are left untouched.
    pub fn normalize(&mut self) -> f64 {
        let total = self.total();
        if total > 0.0 && total.is_finite() {
            for v in &mut self.values {
                *v /= total;
            }
        }
        total
    }

    /// Permute the scope into `order`.
    pub fn reorder(&self, order: &[usize]) -> Factor {
        debug_assert_eq!(order.len(), self.vars.len());
        let strides = self.strides();
        let cards: Vec<usize> = order
            .iter()
            .map(|v| self.cards[self.vars.iter().position(|x| x == v).expect("variable in scope")])
            .collect();
        let src: Vec<usize> =
            order.iter().map(|v| strides[self.vars.iter().position(|x| x == v).unwrap()]).collect();
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut counter = vec![0usize; order.len()];
        let mut idx = 0usize;
        for _ in 0..size {
            values.push(self.values[idx]);
            for d in (0..order.len()).rev() {
                counter[d] += 1;
                idx += src[d];
                if counter[d] < cards[d] {
                    break;
                }
                idx -= src[d] * cards[d];
                counter[d] = 0;
            }
        }
        Factor { vars: order.to_vec(), cards, values }
    }
}
