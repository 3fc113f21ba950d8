#![allow(dead_code, clippy::neg_cmp_op_on_partial_ord)]

use emgrid::meshgen::{boundary_gap, generate, ExcitationSpec, Grid, MeshParams};
use emgrid::scene::{Geometry, Material, SceneNode, Shape};
use num_bigint::{BigInt, Sign};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const C0: f64 = 299_792_458.0;

pub struct Fixture {
    pub name: &'static str,
    pub scene: SceneNode,
    pub exc: ExcitationSpec,
    pub params: MeshParams,
}

fn leaf(shape: Shape) -> SceneNode {
    SceneNode::Leaf(shape)
}

fn pec_box(id: &str, a: [f64; 3], b: [f64; 3]) -> SceneNode {
    leaf(Shape::cuboid(id, a, b, Material::pec()))
}

pub fn single_box() -> Fixture {
    Fixture {
        name: "single box",
        scene: pec_box("patch", [0.0, 0.0, 0.0], [0.03, 0.02, 0.0016]),
        exc: ExcitationSpec::single(30e9),
        params: MeshParams::new(40.0, 30.0, 300.0),
    }
}

pub fn abutting_boxes() -> Fixture {
    Fixture {
        name: "two abutting boxes",
        scene: SceneNode::compound(
            "pair",
            vec![
                leaf(Shape::cuboid(
                    "substrate",
                    [-0.02, -0.015, 0.0],
                    [0.0, 0.015, 0.0016],
                    Material::dielectric(4.4),
                )),
                leaf(Shape::cuboid(
                    "block",
                    [0.0, -0.01, 0.0],
                    [0.025, 0.01, 0.004],
                    Material::dielectric(2.2),
                )),
            ],
        ),
        exc: ExcitationSpec::new(2e9, 6e9),
        params: MeshParams::new(40.0, 30.0, 300.0),
    }
}

pub fn thin_sheet() -> Fixture {
    Fixture {
        name: "thin sheet",
        scene: pec_box("sheet", [-0.05, -0.05, 0.0], [0.05, 0.05, 0.0]),
        exc: ExcitationSpec::single(30e9),
        params: MeshParams::new(40.0, 30.0, 300.0),
    }
}

/// Compounds C1..C6 and shapes S1..S7 nested so that the pre-order walk is
/// C1 C2 C3 S1 C4 C5 S2 S3 S4 C6 S5 S6 S7.
pub fn dfs_tree() -> SceneNode {
    let s = |i: usize| {
        let x = i as f64 * 0.004;
        pec_box(&format!("S{i}"), [x, 0.0, 0.0], [x + 0.002, 0.003, 0.001 * i as f64])
    };
    SceneNode::compound(
        "C1",
        vec![
            SceneNode::compound(
                "C2",
                vec![
                    SceneNode::compound("C3", vec![s(1)]),
                    SceneNode::compound("C4", vec![SceneNode::compound("C5", vec![s(2), s(3)]), s(4)]),
                ],
            ),
            SceneNode::compound("C6", vec![s(5), s(6), s(7)]),
        ],
    )
}

pub fn nested_compounds() -> Fixture {
    Fixture {
        name: "nested compounds",
        scene: dfs_tree(),
        exc: ExcitationSpec::new(10e9, 20e9),
        params: MeshParams::new(40.0, 30.0, 300.0),
    }
}

/// Fifty random boxes and vertex sets inside a 10 cm cube, with mixed materials.
pub fn random_scene(seed: u64, shapes: usize) -> SceneNode {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut children = Vec::with_capacity(shapes);
    let mut group = Vec::new();
    for i in 0..shapes {
        let material = match rng.gen_range(0..3) {
            0 => Material::pec(),
            1 => Material::dielectric(rng.gen_range(1.5..10.0)),
            _ => Material::vacuum(),
        };
        let shape = if rng.gen_bool(0.8) {
            let a: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-0.05..0.05));
            let b: [f64; 3] = std::array::from_fn(|k| a[k] + rng.gen_range(0.0005..0.03));
            Shape::cuboid(format!("s{i}"), a, b, material)
        } else {
            let n = rng.gen_range(1..6);
            let v = (0..n)
                .map(|_| std::array::from_fn(|_| rng.gen_range(-0.05..0.05)))
                .collect();
            Shape::vertex_set(format!("s{i}"), v, material)
        };
        group.push(leaf(shape));
        if group.len() == 5 {
            children.push(SceneNode::compound(format!("g{i}"), std::mem::take(&mut group)));
        }
    }
    children.extend(group);
    SceneNode::compound("random", children)
}

pub fn random_fixture() -> Fixture {
    Fixture {
        name: "random 50 shapes",
        scene: random_scene(7, 50),
        exc: ExcitationSpec::new(2e9, 10e9),
        params: MeshParams::new(40.0, 30.0, 300.0),
    }
}

pub fn fixtures() -> Vec<Fixture> {
    vec![
        single_box(),
        abutting_boxes(),
        thin_sheet(),
        nested_compounds(),
        random_fixture(),
    ]
}

// Independent geometry helpers, deliberately not using the library's own.

pub fn shapes_of(node: &SceneNode) -> Vec<&Shape> {
    match node {
        SceneNode::Leaf(s) => vec![s],
        SceneNode::Compound { children, .. } => children.iter().flat_map(shapes_of).collect(),
    }
}

pub fn projected_vertices(node: &SceneNode, axis: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for s in shapes_of(node) {
        match &s.geometry {
            Geometry::Box { min, max } => {
                out.push(min[axis]);
                out.push(max[axis]);
            }
            Geometry::VertexSet(v) => out.extend(v.iter().map(|p| p[axis])),
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

pub fn mirror(node: &SceneNode, axis: usize) -> SceneNode {
    let flip = |p: &[f64; 3]| {
        let mut q = *p;
        q[axis] = -q[axis];
        q
    };
    match node {
        SceneNode::Compound { name, children } => SceneNode::compound(
            name.clone(),
            children.iter().map(|c| mirror(c, axis)).collect(),
        ),
        SceneNode::Leaf(s) => SceneNode::Leaf(match &s.geometry {
            Geometry::Box { min, max } => Shape::cuboid(s.id.clone(), flip(min), flip(max), s.material),
            Geometry::VertexSet(v) => {
                Shape::vertex_set(s.id.clone(), v.iter().map(flip).collect(), s.material)
            }
        }),
    }
}

/// Violations of the mesh invariants for one generated grid.
pub fn mesh_violations(fx: &Fixture, grid: &Grid) -> Vec<String> {
    let mut bad = Vec::new();
    let p = &fx.params;
    let lmin = C0 / fx.exc.f_max;
    let lmax = C0 / fx.exc.f_min;
    let h_model = lmin / p.max_cell_model;
    let h_space = lmin / p.max_cell_space;
    let eps = lmin / p.min_cell_global;
    let gap = lmin * lmax / (2.0 * (lmin + lmax));
    let tol = 1e-9;
    if (gap - boundary_gap(lmin, lmax)).abs() > 1e-15 * gap {
        bad.push("boundary gap formula".into());
    }

    for axis in 0..3 {
        let mesh = [&grid.x, &grid.y, &grid.z][axis];
        let lines = &mesh.lines;
        let anchors = projected_vertices(&fx.scene, axis);
        let (lo, hi) = (anchors[0], *anchors.last().unwrap());
        let is_anchor = |x: f64| anchors.binary_search_by(|a| a.total_cmp(&x)).is_ok();
        let tag = |msg: String| format!("{} axis {axis}: {msg}", fx.name);

        if mesh.model_interval != (lo, hi) {
            bad.push(tag(format!("model interval {:?}", mesh.model_interval)));
        }
        if let Some(w) = lines.windows(2).find(|w| !(w[1] > w[0])) {
            bad.push(tag(format!("not strictly increasing at {w:?}")));
        }
        for a in &anchors {
            if !lines.contains(a) {
                bad.push(tag(format!("anchor {a} missing")));
            }
        }

        let pml = p.pml_n as usize;
        let n = lines.len();
        if n < 2 * pml + 2 {
            bad.push(tag("too few lines".into()));
            continue;
        }
        for (i, w) in lines.windows(2).enumerate() {
            let cell = w[1] - w[0];
            if cell < eps * (1.0 - tol) && !(is_anchor(w[0]) && is_anchor(w[1])) {
                bad.push(tag(format!("cell {cell} below floor {eps} at {}", w[0])));
            }
            let in_pml = i < pml || i >= n - 1 - pml;
            if in_pml {
                if (cell - h_space).abs() > tol * h_space {
                    bad.push(tag(format!("PML cell {cell} != {h_space}")));
                }
            } else if w[0] < hi && w[1] > lo {
                if cell > h_model * (1.0 + tol) {
                    bad.push(tag(format!("model cell {cell} above {h_model} at {}", w[0])));
                }
            } else if cell > h_space * (1.0 + tol) {
                bad.push(tag(format!("space cell {cell} above {h_space} at {}", w[0])));
            }
        }

        let pad = gap + p.pml_n as f64 * h_space;
        let span = hi - lo + 2.0 * pad;
        if (lines[0] - (lo - pad)).abs() > 1e-12 * span
            || (lines[n - 1] - (hi + pad)).abs() > 1e-12 * span
        {
            bad.push(tag(format!(
                "domain [{}, {}] != [{}, {}]",
                lines[0],
                lines[n - 1],
                lo - pad,
                hi + pad
            )));
        }

        // Grading inside the fans of isolated anchors.
        let reach = h_model / p.grading_ratio;
        for (k, &a) in anchors.iter().enumerate() {
            let left = if k > 0 { a - anchors[k - 1] } else { f64::INFINITY };
            let right = anchors.get(k + 1).map_or(f64::INFINITY, |&b| b - a);
            let isolation = (lmin / p.res_fraction[axis]).max(2.0 * h_model);
            if left.min(right) <= isolation {
                continue;
            }
            let fan: Vec<f64> = lines
                .iter()
                .copied()
                .filter(|&x| (x - a).abs() <= reach * (1.0 + tol))
                .collect();
            if p.n[axis] > 0 && fan.len() < 3 {
                bad.push(tag(format!("no refinement fan around {a}")));
            }
            let cells: Vec<f64> = fan.windows(2).map(|w| w[1] - w[0]).collect();
            for c in cells.windows(2) {
                let ratio = c[0].max(c[1]) / c[0].min(c[1]);
                if ratio > p.grading_ratio * (1.0 + tol) {
                    bad.push(tag(format!("grading ratio {ratio} around {a}")));
                }
            }
        }
    }

    let min_edge = |m: &emgrid::meshgen::AxisMesh| {
        m.lines.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    };
    let dt = emgrid::meshgen::cfl_timestep(min_edge(&grid.x), min_edge(&grid.y), min_edge(&grid.z), C0)
        .unwrap();
    if dt.to_bits() != grid.dt_max.to_bits() {
        bad.push(format!("{}: dt_max {} != recomputed {dt}", fx.name, grid.dt_max));
    }
    bad
}

/// Mirrors each axis in turn and checks the grid mirrors with it.
pub fn symmetry_violations(fx: &Fixture, grid: &Grid) -> Vec<String> {
    let mut bad = Vec::new();
    for axis in 0..3 {
        let mirrored = generate(&mirror(&fx.scene, axis), &fx.exc, &fx.params).unwrap();
        for other in 0..3 {
            let a = &[&grid.x, &grid.y, &grid.z][other].lines;
            let b = &[&mirrored.x, &mirrored.y, &mirrored.z][other].lines;
            if a.len() != b.len() {
                bad.push(format!("{}: mirror {axis} changes axis {other} line count", fx.name));
                continue;
            }
            let span = a[a.len() - 1] - a[0];
            let ok = if other == axis {
                a.iter().zip(b.iter().rev()).all(|(x, y)| (x + y).abs() <= 1e-12 * span)
            } else {
                a == b
            };
            if !ok {
                bad.push(format!("{}: mirror {axis} breaks axis {other}", fx.name));
            }
        }
    }
    bad
}

/// Builds every axis on one thread and compares with the parallel result.
pub fn determinism_violations(fx: &Fixture, grid: &Grid) -> Vec<String> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let serial = pool.install(|| generate(&fx.scene, &fx.exc, &fx.params)).unwrap();
    let again = generate(&fx.scene, &fx.exc, &fx.params).unwrap();
    let mut bad = Vec::new();
    if &serial != grid {
        bad.push(format!("{}: serial and parallel grids differ", fx.name));
    }
    if &again != grid {
        bad.push(format!("{}: repeated generation differs", fx.name));
    }
    bad
}

// Exact rational evaluation of the CFL bound with big integers.

fn dyadic(x: f64) -> (BigInt, i64) {
    assert!(x.is_finite() && x > 0.0);
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 {
        (BigInt::from(frac), -1074)
    } else {
        (BigInt::from(frac | (1u64 << 52)), exp - 1075)
    }
}

fn pow2(k: i64) -> BigInt {
    BigInt::from(1) << (k as usize)
}

/// `1 / (c sqrt(1/dx^2 + 1/dy^2 + 1/dz^2))` to roughly 120 significant bits.
pub fn cfl_oracle(dx: f64, dy: f64, dz: f64, c: f64) -> f64 {
    // 1/d^2 = 2^(-2e) / m^2. Put everything over a common power-of-two shift.
    let terms: Vec<(BigInt, i64)> = [dx, dy, dz].iter().map(|&d| dyadic(d)).collect();
    let (cm, ce) = dyadic(c);
    // S = sum 2^(-2 e_i) / m_i^2 = N / D with D = prod m_i^2 * 2^shift
    let shift = terms.iter().map(|(_, e)| 2 * e).max().unwrap();
    let m2: Vec<BigInt> = terms.iter().map(|(m, _)| m * m).collect();
    let den_m = &m2[0] * &m2[1] * &m2[2];
    let mut num = BigInt::from(0);
    for (i, (_, e)) in terms.iter().enumerate() {
        let others = den_m.clone() / &m2[i];
        num += others * pow2(shift - 2 * e);
    }
    // S = num / (den_m * 2^shift); dt^2 = den_m * 2^shift / (c^2 num)
    // c = cm * 2^ce, so c^2 = cm^2 * 2^(2 ce).
    let scale_bits: i64 = 240;
    let mut top = den_m * pow2(scale_bits);
    let mut bottom = &cm * &cm * num;
    let e_total = shift - 2 * ce;
    if e_total >= 0 {
        top <<= e_total as usize;
    } else {
        bottom <<= (-e_total) as usize;
    }
    let dt_scaled = (top / bottom).sqrt(); // dt * 2^(scale_bits/2)
    let (sign, _) = dt_scaled.to_bytes_be();
    assert_eq!(sign, Sign::Plus);
    dt_scaled.to_f64().unwrap() / 2f64.powi((scale_bits / 2) as i32)
}
