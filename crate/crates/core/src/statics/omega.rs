//! Integer feasibility of conjunctions of linear constraints, by the Omega
//! test: exact equality elimination, Fourier-Motzkin with real and dark
//! shadows, and splintering when the shadows disagree.

/// `Σ coeffs[i]·x_i + constant (>= 0 | = 0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<i128>,
    pub constant: i128,
    pub eq: bool,
}

impl Constraint {
    pub fn geq(coeffs: Vec<i128>, constant: i128) -> Self {
        Constraint {
            coeffs,
            constant,
            eq: false,
        }
    }

    pub fn eq(coeffs: Vec<i128>, constant: i128) -> Self {
        Constraint {
            coeffs,
            constant,
            eq: true,
        }
    }

    fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0)
    }
}

/// Outcome when the search gives up (coefficient blow-up or step budget).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Unknown;

const LIMIT: i128 = 1 << 60;
const BUDGET: usize = 200_000;

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

/// Symmetric remainder: `a - b·⌊a/b + 1/2⌋`.
fn mod_hat(a: i128, b: i128) -> i128 {
    a - b * floor_div(2 * a + b, 2 * b)
}

/// Decides whether the conjunction has an integer solution over
/// `nvars` unknowns.
pub fn satisfiable(nvars: usize, cs: &[Constraint]) -> Result<bool, Unknown> {
    let mut budget = BUDGET;
    let cs: Vec<Constraint> = cs
        .iter()
        .map(|c| {
            let mut c = c.clone();
            c.coeffs.resize(nvars, 0);
            c
        })
        .collect();
    solve(nvars, cs, &mut budget)
}

/// Divides by the coefficient gcd, tightening inequalities. Returns
/// `Ok(None)` when the constraint is trivially true, `Err(())` when it is
/// trivially false.
fn normalize(mut c: Constraint) -> Result<Option<Constraint>, ()> {
    if c.is_constant() {
        let ok = if c.eq {
            c.constant == 0
        } else {
            c.constant >= 0
        };
        return if ok { Ok(None) } else { Err(()) };
    }
    let g = c.coeffs.iter().fold(0, |g, x| gcd(g, *x));
    if g > 1 {
        if c.eq {
            if c.constant % g != 0 {
                return Err(());
            }
            c.constant /= g;
        } else {
            c.constant = floor_div(c.constant, g);
        }
        for x in c.coeffs.iter_mut() {
            *x /= g;
        }
    }
    Ok(Some(c))
}

fn too_big(c: &Constraint) -> bool {
    c.constant.abs() > LIMIT || c.coeffs.iter().any(|x| x.abs() > LIMIT)
}

/// Replaces `x_k` by `expr` (coefficients over all vars plus constant) in `c`.
fn substitute(c: &Constraint, k: usize, expr: &[i128], expr_const: i128) -> Constraint {
    let a = c.coeffs[k];
    if a == 0 {
        return c.clone();
    }
    let mut out = c.clone();
    out.coeffs[k] = 0;
    for (i, e) in expr.iter().enumerate() {
        out.coeffs[i] += a * e;
    }
    out.constant += a * expr_const;
    out
}

fn solve(nvars: usize, cs: Vec<Constraint>, budget: &mut usize) -> Result<bool, Unknown> {
    if *budget == 0 {
        return Err(Unknown);
    }
    *budget -= 1;

    let mut work = Vec::with_capacity(cs.len());
    for c in cs {
        if too_big(&c) {
            return Err(Unknown);
        }
        match normalize(c) {
            Err(()) => return Ok(false),
            Ok(None) => {}
            Ok(Some(c)) => work.push(c),
        }
    }

    // Equalities first, unit coefficients before the rest. A non-unit
    // equality being reduced sits at the front until it is solved.
    let unit = work
        .iter()
        .position(|c| c.eq && c.coeffs.iter().any(|a| a.abs() == 1));
    if let Some(pos) = unit.or_else(|| work.iter().position(|c| c.eq)) {
        let eq = work.remove(pos);
        return eliminate_equality(nvars, eq, work, budget);
    }

    // Pairs of opposite inequalities: contradiction, or a hidden equality.
    for i in 0..work.len() {
        for j in (i + 1)..work.len() {
            let opposite = work[i]
                .coeffs
                .iter()
                .zip(&work[j].coeffs)
                .all(|(a, b)| *a == -*b);
            if opposite {
                let s = work[i].constant + work[j].constant;
                if s < 0 {
                    return Ok(false);
                }
                if s == 0 {
                    let mut eq = work[i].clone();
                    eq.eq = true;
                    work.remove(j);
                    work.remove(i);
                    work.push(eq);
                    return solve(nvars, work, budget);
                }
            }
        }
    }

    if work.is_empty() {
        return Ok(true);
    }

    // Pick the variable to eliminate: unbounded on one side first, then
    // exact eliminations, then the fewest pairs.
    let mut best: Option<(usize, (u8, usize))> = None;
    for k in 0..nvars {
        let lows = work.iter().filter(|c| c.coeffs[k] > 0).count();
        let ups = work.iter().filter(|c| c.coeffs[k] < 0).count();
        if lows + ups == 0 {
            continue;
        }
        let exact = work.iter().all(|c| c.coeffs[k] >= -1) || work.iter().all(|c| c.coeffs[k] <= 1);
        let key = if lows == 0 || ups == 0 {
            (0, 0)
        } else if exact {
            (1, lows * ups)
        } else {
            (2, lows * ups)
        };
        if best.is_none_or(|(_, b)| key < b) {
            best = Some((k, key));
        }
    }
    let Some((k, (class, _))) = best else {
        return Ok(true);
    };

    let (with, rest): (Vec<_>, Vec<_>) = work.into_iter().partition(|c| c.coeffs[k] != 0);
    if class == 0 {
        return solve(nvars, rest, budget);
    }
    let lows: Vec<&Constraint> = with.iter().filter(|c| c.coeffs[k] > 0).collect();
    let ups: Vec<&Constraint> = with.iter().filter(|c| c.coeffs[k] < 0).collect();

    let combine = |lo: &Constraint, up: &Constraint, dark: bool| {
        // lo: a·x + α >= 0, up: -b·x + β >= 0  ==>  b·α + a·β >= 0
        let a = lo.coeffs[k];
        let b = -up.coeffs[k];
        let mut coeffs: Vec<i128> = lo
            .coeffs
            .iter()
            .zip(&up.coeffs)
            .map(|(x, y)| b * x + a * y)
            .collect();
        coeffs[k] = 0;
        let mut constant = b * lo.constant + a * up.constant;
        if dark {
            constant -= (a - 1) * (b - 1);
        }
        Constraint::geq(coeffs, constant)
    };

    let shadow = |dark: bool| {
        let mut out = rest.clone();
        for lo in &lows {
            for up in &ups {
                out.push(combine(lo, up, dark));
            }
        }
        out
    };

    if class == 1 {
        return solve(nvars, shadow(false), budget);
    }

    if !solve(nvars, shadow(false), budget)? {
        return Ok(false);
    }
    if solve(nvars, shadow(true), budget)? {
        return Ok(true);
    }
    // Splinters: some lower bound is nearly tight.
    let max_up = ups.iter().map(|c| -c.coeffs[k]).max().unwrap_or(1);
    for lo in &lows {
        let a = lo.coeffs[k];
        let top = floor_div(max_up * a - max_up - a, max_up);
        let mut j = 0;
        while j <= top {
            let mut cs = rest.clone();
            cs.extend(with.iter().cloned());
            let mut eq = (*lo).clone();
            eq.eq = true;
            eq.constant -= j;
            cs.push(eq);
            if solve(nvars, cs, budget)? {
                return Ok(true);
            }
            j += 1;
        }
    }
    Ok(false)
}

fn eliminate_equality(
    nvars: usize,
    eq: Constraint,
    rest: Vec<Constraint>,
    budget: &mut usize,
) -> Result<bool, Unknown> {
    // Unit coefficient: solve for that variable directly.
    if let Some(k) = eq.coeffs.iter().position(|c| c.abs() == 1) {
        let s = eq.coeffs[k];
        // s·x_k + Σ a_i x_i + c = 0  ==>  x_k = -s·(Σ a_i x_i + c)
        let mut expr: Vec<i128> = eq.coeffs.iter().map(|a| -s * a).collect();
        expr[k] = 0;
        let expr_const = -s * eq.constant;
        let cs = rest
            .iter()
            .map(|c| substitute(c, k, &expr, expr_const))
            .collect();
        return solve(nvars, cs, budget);
    }
    // Otherwise introduce σ with m·σ = Σ (a_i mod^ m)·x_i + (c mod^ m),
    // where m = |a_k| + 1 for the smallest nonzero |a_k|, and solve for x_k.
    let (k, ak) = eq
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0)
        .min_by_key(|(_, c)| c.abs())
        .map(|(i, c)| (i, *c))
        .expect("normalized equality has a variable");
    let m = ak.abs() + 1;
    let s = ak.signum();
    let sigma = nvars;
    let n2 = nvars + 1;
    // x_k = s·(-m·σ + Σ_{i≠k} r_i x_i + r_c)
    let mut expr = vec![0i128; n2];
    for (i, a) in eq.coeffs.iter().enumerate() {
        if i != k {
            expr[i] = s * mod_hat(*a, m);
        }
    }
    expr[sigma] = -s * m;
    let expr_const = s * mod_hat(eq.constant, m);
    let widen = |c: &Constraint| {
        let mut c = c.clone();
        c.coeffs.resize(n2, 0);
        c
    };
    let mut cs = vec![substitute(&widen(&eq), k, &expr, expr_const)];
    cs.extend(
        rest.iter()
            .map(|c| substitute(&widen(c), k, &expr, expr_const)),
    );
    solve(n2, cs, budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ge(c: &[i128], k: i128) -> Constraint {
        Constraint::geq(c.to_vec(), k)
    }

    fn eq(c: &[i128], k: i128) -> Constraint {
        Constraint::eq(c.to_vec(), k)
    }

    #[test]
    fn empty_is_satisfiable() {
        assert_eq!(satisfiable(0, &[]), Ok(true));
    }

    #[test]
    fn parity_equation_has_no_solution() {
        // 2x = 1
        assert_eq!(satisfiable(1, &[eq(&[2], -1)]), Ok(false));
    }

    #[test]
    fn real_but_not_integer_solution() {
        // 1 <= 3x <= 2
        assert_eq!(satisfiable(1, &[ge(&[3], -1), ge(&[-3], 2)]), Ok(false));
    }

    #[test]
    fn dark_shadow_gap_is_found_by_splinters() {
        // 27 <= 11x + 13y <= 45, -10 <= 7x - 9y <= 4 (Pugh's example: no solution)
        let cs = [
            ge(&[11, 13], -27),
            ge(&[-11, -13], 45),
            ge(&[7, -9], 10),
            ge(&[-7, 9], 4),
        ];
        assert_eq!(satisfiable(2, &cs), Ok(false));
    }

    #[test]
    fn non_unit_equalities() {
        // 3x + 5y = 7, x, y >= 0  ->  x = 4, y = -1 no; x = -1... ; try bounded search
        let cs = [eq(&[3, 5], -7), ge(&[1, 0], 0), ge(&[0, 1], 0)];
        // 3x + 5y = 7 has no nonnegative solution
        assert_eq!(satisfiable(2, &cs), Ok(false));
        let cs = [eq(&[3, 5], -8), ge(&[1, 0], 0), ge(&[0, 1], 0)];
        assert_eq!(satisfiable(2, &cs), Ok(true));
    }

    #[test]
    fn interleaved_non_unit_equalities_terminate() {
        let mut cs = vec![
            eq(&[-2, 3, 2], 5),
            eq(&[2, -4, -1], 2),
            ge(&[2, -3, 2], -5),
            eq(&[1, 3, 4], -5),
        ];
        for i in 0..3 {
            let mut c = vec![0; 3];
            c[i] = 1;
            cs.push(ge(&c, 8));
            c[i] = -1;
            cs.push(ge(&c, 8));
        }
        assert_eq!(satisfiable(3, &cs), Ok(false));
    }

    #[test]
    fn brute_force_agreement_small() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..400 {
            let n = rng.gen_range(1..=3usize);
            let m = rng.gen_range(1..=4usize);
            let mut cs = Vec::new();
            for _ in 0..m {
                let coeffs: Vec<i128> = (0..n).map(|_| rng.gen_range(-4..=4)).collect();
                let k = rng.gen_range(-6..=6);
                cs.push(if rng.gen_bool(0.25) {
                    eq(&coeffs, k)
                } else {
                    ge(&coeffs, k)
                });
            }
            // box the variables so brute force is complete
            for i in 0..n {
                let mut c = vec![0; n];
                c[i] = 1;
                cs.push(ge(&c, 5));
                let mut c = vec![0; n];
                c[i] = -1;
                cs.push(ge(&c, 5));
            }
            let mut found = false;
            let mut x = vec![-5i128; n];
            'outer: loop {
                if cs.iter().all(|c| {
                    let v: i128 =
                        c.coeffs.iter().zip(&x).map(|(a, b)| a * b).sum::<i128>() + c.constant;
                    if c.eq {
                        v == 0
                    } else {
                        v >= 0
                    }
                }) {
                    found = true;
                    break;
                }
                for i in 0..n {
                    x[i] += 1;
                    if x[i] <= 5 {
                        continue 'outer;
                    }
                    x[i] = -5;
                }
                break;
            }
            assert_eq!(satisfiable(n, &cs), Ok(found), "{:?}", cs);
        }
    }
}
