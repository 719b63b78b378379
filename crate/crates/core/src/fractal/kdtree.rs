use super::FractalMeasure;

const LEAF: usize = 16;

struct Node {
    lo: Vec<f64>,
    hi: Vec<f64>,
    mass: f64,
    /// Range into the permuted atom order.
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

/// Axis-split tree over the atoms with subtree masses, for ball-mass queries.
pub struct KdTree<'a> {
    mu: &'a FractalMeasure,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl<'a> KdTree<'a> {
    pub fn new(mu: &'a FractalMeasure) -> Self {
        let mut tree = KdTree {
            mu,
            order: (0..mu.len()).collect(),
            nodes: Vec::new(),
        };
        tree.build(0, mu.len());
        tree
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let d = self.mu.dim;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        let mut mass = 0.0;
        for &i in &self.order[start..end] {
            let a = self.mu.atom(i);
            for k in 0..d {
                lo[k] = lo[k].min(a[k]);
                hi[k] = hi[k].max(a[k]);
            }
            mass += self.mu.masses[i];
        }
        let id = self.nodes.len();
        self.nodes.push(Node {
            lo: lo.clone(),
            hi: hi.clone(),
            mass,
            start,
            end,
            children: None,
        });
        if end - start > LEAF {
            let axis = (0..d)
                .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
                .unwrap();
            let mid = start + (end - start) / 2;
            let mu = self.mu;
            self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                mu.atom(a)[axis]
                    .total_cmp(&mu.atom(b)[axis])
                    .then(a.cmp(&b))
            });
            let l = self.build(start, mid);
            let r = self.build(mid, end);
            self.nodes[id].children = Some((l, r));
        }
        id
    }

    /// μ(B(center, r)) for the open ball.
    pub fn ball_mass(&self, center: &[f64], r: f64) -> f64 {
        self.visit(0, center, r * r)
    }

    fn visit(&self, id: usize, c: &[f64], r2: f64) -> f64 {
        let n = &self.nodes[id];
        let (mut near, mut far) = (0.0, 0.0);
        for k in 0..c.len() {
            let dn = if c[k] < n.lo[k] {
                n.lo[k] - c[k]
            } else if c[k] > n.hi[k] {
                c[k] - n.hi[k]
            } else {
                0.0
            };
            let df = (c[k] - n.lo[k]).abs().max((n.hi[k] - c[k]).abs());
            near += dn * dn;
            far += df * df;
        }
        if near >= r2 {
            return 0.0;
        }
        if far < r2 {
            return n.mass;
        }
        match n.children {
            Some((l, r)) => self.visit(l, c, r2) + self.visit(r, c, r2),
            None => self.order[n.start..n.end]
                .iter()
                .filter(|&&i| {
                    let a = self.mu.atom(i);
                    a.iter().zip(c).map(|(x, y)| (x - y).powi(2)).sum::<f64>() < r2
                })
                .map(|&i| self.mu.masses[i])
                .sum(),
        }
    }
}
