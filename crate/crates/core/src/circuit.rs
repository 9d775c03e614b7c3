//! Three-qubit circuits: a small gate IR, evaluation to an 8x8 unitary,
//! exact two-level synthesis along a Gray-code path, a lowering pass to
//! single-qubit gates plus CNOT, and a QASM-like text format.
//!
//! Qubits are numbered 0, 1, 2 (printed as `q[0]`..`q[2]`, i.e. q1..q3).
//! The encoding is big-endian: basis index `4*q1 + 2*q2 + q3`, so `|000>`
//! is index 0, the electronic ground state.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{c, ensure_unitary, frobenius, trace, ComplexMatrix, C64};

pub const QUBITS: usize = 3;
pub const DIM: usize = 1 << QUBITS;
/// Tolerance on the unitarity of synthesis targets.
pub const UNITARY_TOL: f64 = 1e-10;

/// Visiting order of the basis states; consecutive entries differ in one bit.
pub const GRAY_ORDER: [usize; DIM] = [0b000, 0b001, 0b011, 0b010, 0b110, 0b111, 0b101, 0b100];

// Angles this small are dropped during synthesis.
const ANGLE_EPS: f64 = 1e-15;
// Off-diagonal amplitudes this small are treated as already eliminated.
const ELIM_EPS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    X,
    Ry(f64),
    Rz(f64),
    /// `diag(1, e^{i phi})`.
    Phase(f64),
}

impl GateKind {
    fn angle(&self) -> Option<f64> {
        match *self {
            GateKind::X => None,
            GateKind::Ry(a) | GateKind::Rz(a) | GateKind::Phase(a) => Some(a),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::Ry(_) => "ry",
            GateKind::Rz(_) => "rz",
            GateKind::Phase(_) => "p",
        }
    }

    fn with_angle(&self, angle: f64) -> GateKind {
        match self {
            GateKind::X => GateKind::X,
            GateKind::Ry(_) => GateKind::Ry(angle),
            GateKind::Rz(_) => GateKind::Rz(angle),
            GateKind::Phase(_) => GateKind::Phase(angle),
        }
    }

    /// The 2x2 matrix acting on (|0>, |1>) of the target.
    pub fn matrix(&self) -> [[C64; 2]; 2] {
        match *self {
            GateKind::X => [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
            GateKind::Ry(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
            }
            GateKind::Rz(t) => [
                [C64::from_polar(1.0, -t / 2.0), c(0.0, 0.0)],
                [c(0.0, 0.0), C64::from_polar(1.0, t / 2.0)],
            ],
            GateKind::Phase(t) => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), C64::from_polar(1.0, t)]],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Control {
    pub qubit: usize,
    /// `true` for a filled control (fires on |1>), `false` for an open one.
    pub on_one: bool,
}

impl Control {
    pub fn one(qubit: usize) -> Self {
        Self { qubit, on_one: true }
    }

    pub fn zero(qubit: usize) -> Self {
        Self { qubit, on_one: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    kind: GateKind,
    target: usize,
    controls: Vec<Control>,
}

fn bit_of(qubit: usize) -> usize {
    1 << (QUBITS - 1 - qubit)
}

impl Gate {
    pub fn new(kind: GateKind, target: usize, controls: Vec<Control>) -> Result<Self> {
        if target >= QUBITS {
            return Err(Error::InvalidGate(format!("target qubit {target} out of range")));
        }
        if let Some(a) = kind.angle() {
            if !a.is_finite() {
                return Err(Error::InvalidGate(format!("non-finite angle {a}")));
            }
        }
        for (i, ctl) in controls.iter().enumerate() {
            if ctl.qubit >= QUBITS {
                return Err(Error::InvalidGate(format!("control qubit {} out of range", ctl.qubit)));
            }
            if ctl.qubit == target {
                return Err(Error::InvalidGate(format!("qubit {target} is both target and control")));
            }
            if controls[..i].iter().any(|o| o.qubit == ctl.qubit) {
                return Err(Error::InvalidGate(format!("qubit {} listed twice as control", ctl.qubit)));
            }
        }
        Ok(Self { kind, target, controls })
    }

    pub fn x(target: usize) -> Result<Self> {
        Self::new(GateKind::X, target, vec![])
    }

    pub fn ry(theta: f64, target: usize) -> Result<Self> {
        Self::new(GateKind::Ry(theta), target, vec![])
    }

    pub fn cx(control: usize, target: usize) -> Result<Self> {
        Self::new(GateKind::X, target, vec![Control::one(control)])
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn controls(&self) -> &[Control] {
        &self.controls
    }

    fn is_inverse_of(&self, other: &Gate) -> bool {
        if self.target != other.target || self.controls != other.controls {
            return false;
        }
        match (self.kind, other.kind) {
            (GateKind::X, GateKind::X) => true,
            (GateKind::Ry(a), GateKind::Ry(b)) | (GateKind::Rz(a), GateKind::Rz(b)) | (GateKind::Phase(a), GateKind::Phase(b)) => {
                a + b == 0.0
            }
            _ => false,
        }
    }

    /// Basis states on which the controls fire.
    fn fires(&self, state: usize) -> bool {
        self.controls
            .iter()
            .all(|ctl| (state & bit_of(ctl.qubit) != 0) == ctl.on_one)
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let m = self.kind.matrix();
        let tb = bit_of(self.target);
        let mut out = ComplexMatrix::zeros(DIM, DIM);
        for s in 0..DIM {
            if !self.fires(s) {
                out[(s, s)] = c(1.0, 0.0);
                continue;
            }
            let b = usize::from(s & tb != 0);
            let base = s & !tb;
            for (r, row) in m.iter().enumerate() {
                out[(base | if r == 1 { tb } else { 0 }, s)] = row[b];
            }
        }
        out
    }

    fn to_qasm(&self) -> String {
        let angle = self.kind.angle().map(|a| format!("({a:.16e})")).unwrap_or_default();
        let name = self.kind.name();
        match self.controls.as_slice() {
            [] => format!("{name}{angle} q[{}];", self.target),
            [ctl] if ctl.on_one && self.kind == GateKind::X => {
                format!("cx q[{}],q[{}];", ctl.qubit, self.target)
            }
            ctls => {
                let bits: String = ctls.iter().map(|c| if c.on_one { '1' } else { '0' }).collect();
                let list: Vec<String> = ctls.iter().map(|c| format!("q[{}]", c.qubit)).collect();
                format!("c{name}{angle} ctrl({bits}) {} -> q[{}];", list.join(","), self.target)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(gates: Vec<Gate>) -> Self {
        Self { gates }
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Circuit) -> Circuit {
        let mut gates = self.gates.clone();
        gates.extend(other.gates.iter().cloned());
        Circuit { gates }
    }

    /// Product of the gate matrices, the first gate acting first.
    pub fn evaluate(&self) -> ComplexMatrix {
        self.gates
            .iter()
            .fold(ComplexMatrix::identity(DIM, DIM), |acc, g| g.matrix() * acc)
    }

    /// Rewrites every gate into uncontrolled single-qubit gates and CNOTs.
    /// The result evaluates to the same unitary, including global phase.
    pub fn lower(&self) -> Circuit {
        let mut out = Vec::new();
        for g in &self.gates {
            lower_gate(g, &mut out);
        }
        Circuit { gates: out }.cancel_inverses()
    }

    /// Removes adjacent gate pairs that multiply to the identity.
    pub fn cancel_inverses(&self) -> Circuit {
        let mut out: Vec<Gate> = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            match out.last() {
                Some(prev) if prev.is_inverse_of(g) => {
                    out.pop();
                }
                _ => out.push(g.clone()),
            }
        }
        Circuit { gates: out }
    }

    pub fn to_qasm(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            let _ = writeln!(out, "{}", g.to_qasm());
        }
        out
    }

    pub fn from_qasm(text: &str) -> Result<Circuit> {
        let mut gates = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split("//").next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let gate = parse_gate(line).map_err(|message| Error::Parse {
                line: idx + 1,
                message,
            })?;
            gates.push(gate);
        }
        Ok(Circuit { gates })
    }
}

fn parse_qubit(s: &str) -> std::result::Result<usize, String> {
    let s = s.trim();
    let inner = s
        .strip_prefix("q[")
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| format!("expected q[i], found {s:?}"))?;
    inner.parse().map_err(|_| format!("bad qubit index {inner:?}"))
}

fn parse_gate(line: &str) -> std::result::Result<Gate, String> {
    let body = line
        .strip_suffix(';')
        .ok_or_else(|| "missing ';'".to_string())?
        .trim();
    let (head, rest) = body
        .split_once(|ch: char| ch.is_whitespace())
        .ok_or_else(|| format!("malformed gate {body:?}"))?;
    let (name, angle) = match head.split_once('(') {
        Some((n, a)) => {
            let a = a.strip_suffix(')').ok_or_else(|| format!("unclosed angle in {head:?}"))?;
            let v: f64 = a.trim().parse().map_err(|_| format!("bad angle {a:?}"))?;
            (n, Some(v))
        }
        None => (head, None),
    };
    let (controlled, base) = match name.strip_prefix('c') {
        Some(b) if matches!(b, "x" | "ry" | "rz" | "p") => (true, b),
        _ => (false, name),
    };
    let kind = match (base, angle) {
        ("x", None) => GateKind::X,
        ("ry", Some(a)) => GateKind::Ry(a),
        ("rz", Some(a)) => GateKind::Rz(a),
        ("p", Some(a)) => GateKind::Phase(a),
        _ => return Err(format!("unknown gate {head:?}")),
    };
    let rest = rest.trim();
    let gate = if !controlled {
        Gate::new(kind, parse_qubit(rest)?, vec![])
    } else if let Some(spec) = rest.strip_prefix("ctrl(") {
        let (bits, tail) = spec.split_once(')').ok_or("unclosed ctrl(")?;
        let (list, target) = tail.split_once("->").ok_or("missing '->'")?;
        let qubits = list
            .split(',')
            .map(parse_qubit)
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if bits.len() != qubits.len() {
            return Err(format!("{} control bits for {} control qubits", bits.len(), qubits.len()));
        }
        let controls = bits
            .chars()
            .zip(qubits)
            .map(|(b, q)| match b {
                '1' => Ok(Control::one(q)),
                '0' => Ok(Control::zero(q)),
                other => Err(format!("bad control bit {other:?}")),
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Gate::new(kind, parse_qubit(target)?, controls)
    } else if kind == GateKind::X {
        let (ctl, target) = rest.split_once(',').ok_or("cx needs two qubits")?;
        Gate::cx(parse_qubit(ctl)?, parse_qubit(target)?)
    } else {
        return Err(format!("{name} needs a ctrl(...) clause"));
    };
    gate.map_err(|e| e.to_string())
}

fn push(out: &mut Vec<Gate>, kind: GateKind, target: usize, controls: Vec<Control>) {
    out.push(Gate::new(kind, target, controls).expect("lowering preserves gate validity"));
}

fn lower_gate(g: &Gate, out: &mut Vec<Gate>) {
    // Open controls become filled ones between X gates.
    let flips: Vec<usize> = g.controls.iter().filter(|c| !c.on_one).map(|c| c.qubit).collect();
    for &q in &flips {
        push(out, GateKind::X, q, vec![]);
    }
    let ctl: Vec<usize> = g.controls.iter().map(|c| c.qubit).collect();
    lower_positive(g.kind, g.target, &ctl, out);
    for &q in &flips {
        push(out, GateKind::X, q, vec![]);
    }
}

fn lower_positive(kind: GateKind, t: usize, ctl: &[usize], out: &mut Vec<Gate>) {
    match (kind, ctl) {
        (k, []) => push(out, k, t, vec![]),
        (GateKind::X, [c0]) => push(out, GateKind::X, t, vec![Control::one(*c0)]),
        (GateKind::X, [..]) => {
            // X = H Z H with H = X Ry(pi/2), and Z = Phase(pi).
            push(out, GateKind::Ry(std::f64::consts::FRAC_PI_2), t, vec![]);
            push(out, GateKind::X, t, vec![]);
            lower_positive(GateKind::Phase(std::f64::consts::PI), t, ctl, out);
            push(out, GateKind::Ry(std::f64::consts::FRAC_PI_2), t, vec![]);
            push(out, GateKind::X, t, vec![]);
        }
        (GateKind::Phase(a), [c0]) => {
            push(out, GateKind::Phase(a / 2.0), *c0, vec![]);
            lower_positive(GateKind::Rz(a), t, ctl, out);
        }
        (k @ (GateKind::Ry(a) | GateKind::Rz(a)), [c0]) => {
            push(out, k.with_angle(a / 2.0), t, vec![]);
            push(out, GateKind::X, t, vec![Control::one(*c0)]);
            push(out, k.with_angle(-a / 2.0), t, vec![]);
            push(out, GateKind::X, t, vec![Control::one(*c0)]);
        }
        (k, [c0, c1]) => {
            // Parity trick: c0 + c1 - (c0 xor c1) = 2 c0 c1.
            let a = k.angle().expect("rotation family");
            lower_positive(k.with_angle(a / 2.0), t, &[*c0], out);
            push(out, GateKind::X, *c1, vec![Control::one(*c0)]);
            lower_positive(k.with_angle(-a / 2.0), t, &[*c1], out);
            push(out, GateKind::X, *c1, vec![Control::one(*c0)]);
            lower_positive(k.with_angle(a / 2.0), t, &[*c1], out);
        }
        _ => unreachable!("at most two controls on three qubits"),
    }
}

/// `min_phi || evaluate(c) - e^{i phi} U ||_F`, with the optimal phase taken
/// from `Tr(U^dagger E)`.
pub fn verify_equiv(circuit: &Circuit, u: &ComplexMatrix) -> f64 {
    matrix_distance(&circuit.evaluate(), u)
}

/// Phase-adjusted Frobenius distance between two matrices of equal shape.
pub fn matrix_distance(e: &ComplexMatrix, u: &ComplexMatrix) -> f64 {
    let overlap = trace(&(u.adjoint() * e));
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        c(1.0, 0.0)
    };
    frobenius(&(e - u * phase))
}

/// Angles of `w = Rz(alpha) Ry(beta) Rz(gamma)` for `w` in SU(2).
fn zyz(w: &[[C64; 2]; 2]) -> (f64, f64, f64) {
    let beta = 2.0 * w[1][0].norm().atan2(w[1][1].norm());
    let sum = if w[1][1].norm() > ELIM_EPS { 2.0 * w[1][1].arg() } else { 0.0 };
    let diff = if w[1][0].norm() > ELIM_EPS { 2.0 * w[1][0].arg() } else { 0.0 };
    ((sum + diff) / 2.0, beta, (sum - diff) / 2.0)
}

fn wrap(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let r = a.rem_euclid(two_pi);
    if r > std::f64::consts::PI {
        r - two_pi
    } else {
        r
    }
}

fn controls_except(state: usize, target: usize) -> Vec<Control> {
    (0..QUBITS)
        .filter(|&q| q != target)
        .map(|q| Control {
            qubit: q,
            on_one: state & bit_of(q) != 0,
        })
        .collect()
}

/// Exact synthesis of an 8x8 unitary, up to global phase.
///
/// Rows are reduced column by column with two-level SU(2) rotations between
/// Gray-neighbouring basis states, so every rotation is a single-qubit gate
/// under two controls. The residual diagonal is realised with controlled
/// phase gates. At most 28 * 3 + 7 = 91 gates are emitted.
pub fn synthesize_two_level(u: &ComplexMatrix) -> Result<Circuit> {
    if u.nrows() != DIM || u.ncols() != DIM {
        return Err(Error::DimensionMismatch {
            expected: DIM,
            found: u.nrows().max(u.ncols()),
        });
    }
    if !crate::linalg::all_finite(u) {
        return Err(Error::NonFinite);
    }
    ensure_unitary(u, UNITARY_TOL)?;

    let mut v = u.clone();
    // Two-level rotations in elimination order: (state with target bit 0, target, 2x2 in (lo, hi) order).
    let mut steps: Vec<(usize, usize, [[C64; 2]; 2])> = Vec::new();
    for col_pos in 0..DIM - 1 {
        let col = GRAY_ORDER[col_pos];
        for r in (col_pos + 1..DIM).rev() {
            let (p, q) = (GRAY_ORDER[r - 1], GRAY_ORDER[r]);
            let (x, y) = (v[(p, col)], v[(q, col)]);
            if y.norm() <= ELIM_EPS {
                continue;
            }
            let n = (x.norm_sqr() + y.norm_sqr()).sqrt();
            // Maps (x, y) on (p, q) to (n, 0).
            let m = [[x.conj() / n, y.conj() / n], [-y / n, x / n]];
            let diff = p ^ q;
            let target = (0..QUBITS).find(|&k| bit_of(k) == diff).expect("Gray neighbours");
            let (lo, m_lo_hi) = if p & diff == 0 {
                (p, m)
            } else {
                (q, [[m[1][1], m[1][0]], [m[0][1], m[0][0]]])
            };
            let hi = lo | diff;
            for k in 0..DIM {
                let (a, b) = (v[(lo, k)], v[(hi, k)]);
                v[(lo, k)] = m_lo_hi[0][0] * a + m_lo_hi[0][1] * b;
                v[(hi, k)] = m_lo_hi[1][0] * a + m_lo_hi[1][1] * b;
            }
            steps.push((lo, target, m_lo_hi));
        }
    }

    // G_m ... G_1 U = D, so U = G_1^dag ... G_m^dag D: D acts first.
    let mut gates = Vec::new();
    let phase0 = v[(0, 0)].arg();
    for s in 1..DIM {
        let phi = wrap(v[(s, s)].arg() - phase0);
        if phi.abs() <= ANGLE_EPS {
            continue;
        }
        let target = (0..QUBITS).rev().find(|&k| s & bit_of(k) != 0).expect("s is nonzero");
        gates.push(Gate::new(GateKind::Phase(phi), target, controls_except(s, target))?);
    }
    for (lo, target, m) in steps.into_iter().rev() {
        let adj = [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]];
        let (alpha, beta, gamma) = zyz(&adj);
        let controls = controls_except(lo, target);
        for kind in [GateKind::Rz(gamma), GateKind::Ry(beta), GateKind::Rz(alpha)] {
            if kind.angle().expect("rotation").abs() > ANGLE_EPS {
                gates.push(Gate::new(kind, target, controls.clone())?);
            }
        }
    }
    Ok(Circuit { gates })
}

/// Published frame unitaries and the two hand-drawn circuits, as printed.
pub mod published {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn with_rows(first: [f64; DIM], second: [f64; DIM]) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(DIM, DIM);
        for k in 0..DIM {
            m[(0, k)] = c(first[k], 0.0);
            m[(1, k)] = c(second[k], 0.0);
        }
        // Rows 3..8 carry ones on the anti-diagonal of columns 3..8.
        for r in 2..DIM {
            m[(r, DIM + 1 - r)] = c(1.0, 0.0);
        }
        m
    }

    /// First-stage frame rotation printed for the dissipative generator.
    pub fn dissipative_frame_unitary() -> ComplexMatrix {
        let s = FRAC_1_SQRT_2;
        with_rows(
            [s, s, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [-s, s, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        )
    }

    /// First-stage frame rotation printed for the first dephasing generator.
    /// As printed it is not unitary: column 4 is used three times and
    /// column 2 never.
    pub fn dephasing_frame_unitary() -> ComplexMatrix {
        let s = FRAC_1_SQRT_2;
        with_rows(
            [s, 0.0, 0.0, s, 0.0, 0.0, 0.0, 0.0],
            [-s, 0.0, 0.0, s, 0.0, 0.0, 0.0, 0.0],
        )
    }

    fn gate(kind: GateKind, target: usize, controls: Vec<Control>) -> Gate {
        Gate::new(kind, target, controls).expect("preset gate is valid")
    }

    fn cc(kind: GateKind, q1: bool, q2: bool) -> Gate {
        gate(kind, 2, vec![Control { qubit: 0, on_one: q1 }, Control { qubit: 1, on_one: q2 }])
    }

    /// Dissipative circuit as drawn: both doubly controlled gates use filled
    /// controls.
    pub fn dissipative_circuit_drawn() -> Circuit {
        dissipative_circuit(true, true, true, true)
    }

    /// Dissipative circuit with the control polarities of the accompanying
    /// condition list: rotation on `q1 q2 = 00`, flip on `q1 q2 = 10`.
    pub fn dissipative_circuit_prose() -> Circuit {
        dissipative_circuit(false, false, true, false)
    }

    fn dissipative_circuit(r1: bool, r2: bool, x1: bool, x2: bool) -> Circuit {
        Circuit::new(vec![
            gate(GateKind::X, 0, vec![Control::one(1)]),
            gate(GateKind::X, 2, vec![Control::one(1)]),
            cc(GateKind::Ry(-FRAC_PI_2), r1, r2),
            cc(GateKind::X, x1, x2),
        ])
    }

    /// Dephasing circuit as drawn.
    pub fn dephasing_circuit_drawn() -> Circuit {
        dephasing_circuit(true, true, true, true)
    }

    /// Dephasing circuit with the condition-list polarities: rotation on
    /// `q1 q2 = 01`, flip on `q1 q2 = 10`.
    pub fn dephasing_circuit_prose() -> Circuit {
        dephasing_circuit(false, true, true, false)
    }

    fn dephasing_circuit(r1: bool, r2: bool, x1: bool, x2: bool) -> Circuit {
        Circuit::new(vec![
            cc(GateKind::Ry(-FRAC_PI_2), r1, r2),
            gate(GateKind::X, 2, vec![Control::one(1)]),
            gate(GateKind::X, 0, vec![Control::one(1)]),
            cc(GateKind::X, x1, x2),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::published::*;
    use super::*;
    use crate::linalg::{is_unitary, max_abs};
    use crate::testutil::random_unitary;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_gate(rng: &mut ChaCha8Rng) -> Gate {
        let target = rng.gen_range(0..QUBITS);
        let angle = rng.gen_range(-4.0..4.0);
        let kind = match rng.gen_range(0..4) {
            0 => GateKind::X,
            1 => GateKind::Ry(angle),
            2 => GateKind::Rz(angle),
            _ => GateKind::Phase(angle),
        };
        let mut controls = Vec::new();
        for q in (0..QUBITS).filter(|&q| q != target) {
            if rng.gen_bool(0.5) {
                controls.push(Control { qubit: q, on_one: rng.gen_bool(0.5) });
            }
        }
        Gate::new(kind, target, controls).unwrap()
    }

    fn random_circuit(rng: &mut ChaCha8Rng, n: usize) -> Circuit {
        Circuit::new((0..n).map(|_| random_gate(rng)).collect())
    }

    #[test]
    fn empty_circuit_is_identity() {
        assert_eq!(Circuit::default().evaluate(), ComplexMatrix::identity(8, 8));
    }

    #[test]
    fn x_on_last_qubit_swaps_pairs() {
        let u = Circuit::new(vec![Gate::x(2).unwrap()]).evaluate();
        for s in 0..8 {
            assert_eq!(u[(s ^ 1, s)], c(1.0, 0.0));
        }
    }

    #[test]
    fn cnot_is_involution() {
        let g = Gate::cx(1, 0).unwrap();
        let u = Circuit::new(vec![g.clone(), g]).evaluate();
        assert_eq!(u, ComplexMatrix::identity(8, 8));
    }

    #[test]
    fn big_endian_encoding() {
        // X on q1 maps |000> to |100> = index 4.
        let u = Circuit::new(vec![Gate::x(0).unwrap()]).evaluate();
        assert_eq!(u[(4, 0)], c(1.0, 0.0));
    }

    #[test]
    fn gate_validation() {
        assert!(Gate::new(GateKind::X, 3, vec![]).is_err());
        assert!(Gate::cx(1, 1).is_err());
        assert!(Gate::new(GateKind::X, 0, vec![Control::one(1), Control::zero(1)]).is_err());
        assert!(Gate::ry(f64::NAN, 0).is_err());
    }

    #[test]
    fn evaluation_is_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let a = random_circuit(&mut rng, 6);
            let b = random_circuit(&mut rng, 5);
            let joint = a.then(&b).evaluate();
            assert!(max_abs(&(joint - b.evaluate() * a.evaluate())) < 1e-13);
        }
    }

    #[test]
    fn synthesis_round_trip_on_random_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let u = random_unitary(&mut rng, 8);
            let circ = synthesize_two_level(&u).unwrap();
            assert!(circ.len() <= 91);
            assert!(verify_equiv(&circ, &u) < 1e-10);
        }
    }

    #[test]
    fn synthesis_of_identity_is_empty() {
        let circ = synthesize_two_level(&ComplexMatrix::identity(8, 8)).unwrap();
        assert!(circ.is_empty());
    }

    #[test]
    fn synthesis_of_dissipative_frame() {
        let u = dissipative_frame_unitary();
        let circ = synthesize_two_level(&u).unwrap();
        assert!(verify_equiv(&circ, &u) < 1e-10);
    }

    #[test]
    fn printed_dephasing_frame_is_rejected() {
        let u = dephasing_frame_unitary();
        assert!(!is_unitary(&u, 1e-3));
        assert!(matches!(synthesize_two_level(&u), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn verify_equiv_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let circ = random_circuit(&mut rng, 10);
        let u = circ.evaluate();
        assert!(verify_equiv(&circ, &u) < 1e-12);
        let shifted = &u * C64::from_polar(1.0, std::f64::consts::PI / 7.0);
        assert!(verify_equiv(&circ, &shifted) < 1e-12);
        let flip = Circuit::new(vec![Gate::x(0).unwrap()]).evaluate();
        let d = verify_equiv(&Circuit::default(), &flip);
        assert!((d - 4.0).abs() < 1e-12);
    }

    #[test]
    fn lowering_preserves_unitary_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..40 {
            let circ = random_circuit(&mut rng, 8);
            let low = circ.lower();
            assert!(low
                .gates()
                .iter()
                .all(|g| g.controls().is_empty() || (g.kind() == GateKind::X && g.controls().len() == 1)));
            assert!(max_abs(&(low.evaluate() - circ.evaluate())) < 1e-12);
        }
    }

    #[test]
    fn adjacent_inverses_cancel() {
        let circ = Circuit::new(vec![
            Gate::x(1).unwrap(),
            Gate::ry(0.3, 2).unwrap(),
            Gate::ry(-0.3, 2).unwrap(),
            Gate::x(1).unwrap(),
            Gate::cx(0, 2).unwrap(),
        ]);
        let reduced = circ.cancel_inverses();
        assert_eq!(reduced.gates(), &[Gate::cx(0, 2).unwrap()]);
    }

    #[test]
    fn published_circuits_are_unitary() {
        for circ in [
            dissipative_circuit_drawn(),
            dissipative_circuit_prose(),
            dephasing_circuit_drawn(),
            dephasing_circuit_prose(),
        ] {
            assert_eq!(circ.len(), 4);
            assert!(is_unitary(&circ.evaluate(), 1e-12));
        }
    }

    #[test]
    fn qasm_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let circ = random_circuit(&mut rng, 12);
            let back = Circuit::from_qasm(&circ.to_qasm()).unwrap();
            assert_eq!(back, circ);
        }
    }

    #[test]
    fn qasm_spelling() {
        let circ = Circuit::new(vec![
            Gate::x(0).unwrap(),
            Gate::ry(0.5, 1).unwrap(),
            Gate::cx(1, 2).unwrap(),
            Gate::new(GateKind::Ry(-1.0), 2, vec![Control::one(0), Control::zero(1)]).unwrap(),
        ]);
        let text = circ.to_qasm();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x q[0];");
        assert_eq!(lines[1], "ry(5.0000000000000000e-1) q[1];");
        assert_eq!(lines[2], "cx q[1],q[2];");
        assert_eq!(lines[3], "cry(-1.0000000000000000e0) ctrl(10) q[0],q[1] -> q[2];");
    }

    #[test]
    fn qasm_errors_carry_line() {
        let err = Circuit::from_qasm("x q[0];\n\nfoo q[1];\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        assert!(Circuit::from_qasm("cx q[1],q[1];").is_err());
        assert!(Circuit::from_qasm("ry(1.0) q[0]").is_err());
        assert!(Circuit::from_qasm("cry(1.0) q[0] -> q[1];").is_err());
    }

    proptest! {
        #[test]
        fn synthesis_round_trip_prop(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = random_unitary(&mut rng, 8);
            let circ = synthesize_two_level(&u).unwrap();
            prop_assert!(verify_equiv(&circ, &u) < 1e-10);
            prop_assert!(verify_equiv(&circ.lower(), &u) < 1e-10);
        }

        #[test]
        fn permutation_round_trip(perm in Just((0..8usize).collect::<Vec<_>>()).prop_shuffle()) {
            let mut u = ComplexMatrix::zeros(8, 8);
            for (j, &i) in perm.iter().enumerate() {
                u[(i, j)] = c(1.0, 0.0);
            }
            let circ = synthesize_two_level(&u).unwrap();
            prop_assert!(verify_equiv(&circ, &u) < 1e-10);
        }
    }
}
