use alloc::string::String;
use alloc::sync::Arc;
use core::fmt;

/// A named scalar, optionally indexed (`x[2]`). Indices start at 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    name: Arc<str>,
    index: Option<u32>,
}

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol { name: Arc::from(name), index: None }
    }

    pub fn indexed(name: &str, index: u32) -> Self {
        assert!(index >= 1, "symbol indices start at 1");
        Symbol { name: Arc::from(name), index: Some(index) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn index(&self) -> Option<u32> {
        self.index
    }

    /// Symbol standing for the `order`-th derivative of `base` in
    /// derivative notation `D(base, order)`. Order 0 is `base` itself.
    pub fn derivative_of(base: &Symbol, order: u32) -> Self {
        if order == 0 {
            return base.clone();
        }
        let mut s = String::from(base.name());
        if let Some(i) = base.index {
            s.push('#');
            push_u32(&mut s, i);
        }
        s.push_str("__");
        push_u32(&mut s, order);
        Symbol { name: Arc::from(s.as_str()), index: None }
    }

    /// Inverse of [`Symbol::derivative_of`] for orders at least 1.
    pub fn as_derivative(&self) -> Option<(Symbol, u32)> {
        if self.index.is_some() {
            return None;
        }
        let (head, ord) = self.name.rsplit_once("__")?;
        let order: u32 = ord.parse().ok()?;
        if order == 0 || head.is_empty() {
            return None;
        }
        let base = match head.split_once('#') {
            Some((n, i)) => Symbol::indexed(n, i.parse().ok()?),
            None => Symbol::new(head),
        };
        Some((base, order))
    }
}

fn push_u32(s: &mut String, v: u32) {
    use core::fmt::Write;
    let _ = write!(s, "{v}");
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{}[{}]", self.name, i),
            None => write!(f, "{}", self.name),
        }
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
