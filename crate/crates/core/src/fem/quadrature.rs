/// Symmetric quadrature on a triangle in barycentric coordinates. Weights sum
/// to one; multiply by the triangle area to integrate.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    /// Highest total polynomial degree integrated exactly.
    pub degree: usize,
}

fn orbit3(a: f64) -> [[f64; 3]; 3] {
    let b = 1.0 - 2.0 * a;
    [[a, a, b], [a, b, a], [b, a, a]]
}

fn orbit6(a: f64, b: f64) -> [[f64; 3]; 6] {
    let c = 1.0 - a - b;
    [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]]
}

impl QuadratureRule {
    /// Dunavant degree-4 rule, 6 points.
    pub fn degree4() -> Self {
        let (a1, w1) = (0.445948490915964886318329253883, 0.223381589678011465944827307725);
        let (a2, w2) = (0.091576213509770743459571463402, 0.109951743655321867388505358942);
        let mut points = Vec::with_capacity(6);
        let mut weights = Vec::with_capacity(6);
        for (a, w) in [(a1, w1), (a2, w2)] {
            points.extend(orbit3(a));
            weights.extend([w; 3]);
        }
        Self { points, weights, degree: 4 }
    }

    /// Dunavant degree-6 rule, 12 points.
    pub fn degree6() -> Self {
        let (a1, w1) = (0.249286745170910421291638553107, 0.116786275726379366030690538687);
        let (a2, w2) = (0.063089014491502228340331602870, 0.050844906370206816920936809106);
        let (a3, b3, w3) = (0.310352451033784405416607733956, 0.053145049844816947353249671631, 0.082851075618373575193553456421);
        let mut points = Vec::with_capacity(12);
        let mut weights = Vec::with_capacity(12);
        for (a, w) in [(a1, w1), (a2, w2)] {
            points.extend(orbit3(a));
            weights.extend([w; 3]);
        }
        points.extend(orbit6(a3, b3));
        weights.extend([w3; 6]);
        Self { points, weights, degree: 6 }
    }

    /// Rule used for element degree `r`: exact to degree 2r + 2.
    pub fn for_element_degree(r: usize) -> Self {
        if r <= 1 {
            Self::degree4()
        } else {
            Self::degree6()
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}
