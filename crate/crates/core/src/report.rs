//! Text outputs: budget and scaling CSVs, deviation reports, and the
//! symmetric-versus-asymmetric classification table.

use std::fmt::Write as _;

use crate::functionals::{
    classify_budget, error_budget, BudgetClassification, ErrorBudget, Flag, Functional,
};
use crate::pulse::DesignedPulse;
use crate::simulate::{DeviationReport, ScalingSeries};

/// Header of the budget CSV.
pub fn budget_header() -> String {
    Functional::ALL.map(Functional::name).join(",")
}

/// One CSV row per budget with the physical (ε-multiplied) values at 17
/// significant digits.
pub fn budget_csv(budgets: &[ErrorBudget]) -> String {
    let mut out = budget_header();
    out.push('\n');
    for b in budgets {
        let row: Vec<String> = b.values().iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn scaling_csv(series: &ScalingSeries) -> String {
    let mut out = String::from("k,param,deviation\n");
    for s in &series.samples {
        let _ = writeln!(out, "{},{:.16e},{:.16e}", s.k, s.param, s.deviation);
    }
    let _ = writeln!(out, "# slope={:.16e}", series.fitted_slope);
    let _ = writeln!(out, "# residual={:.16e}", series.fit_residual);
    out
}

/// A gnuplot script with the samples inlined, ready to pipe into `gnuplot -p`.
pub fn scaling_gnuplot(series: &ScalingSeries, ylabel: &str) -> String {
    let mut out = String::new();
    out.push_str("set logscale xy\n");
    out.push_str("set xlabel 'tau_p'\n");
    let _ = writeln!(out, "set ylabel '{ylabel}'");
    let _ = writeln!(
        out,
        "set title 'fitted slope {:.4} (residual {:.2e})'",
        series.fitted_slope, series.fit_residual
    );
    out.push_str("set key left top\n");
    out.push_str("plot '-' using 1:2 with linespoints title 'deviation'\n");
    for s in &series.samples {
        let _ = writeln!(out, "{:.16e} {:.16e}", s.param, s.deviation);
    }
    out.push_str("e\n");
    out
}

pub fn deviation_csv(report: &DeviationReport) -> String {
    let rows = [
        ("target_deviation", report.target_deviation),
        ("control_error", report.control_error),
        ("leading_order_remainder", report.remainder),
        ("eta_norm", report.eta_norm),
        ("unitarity_residual", report.unitarity_residual),
    ];
    let mut out = String::from("quantity,value\n");
    for (name, value) in rows {
        let _ = writeln!(out, "{name},{value:.16e}");
    }
    out
}

/// Condition under which a group's classification holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// Holds for any rotation angle.
    None,
    /// Holds for π pulses.
    PiPulse,
    /// Holds for all symmetric pulses but only the chosen asymmetric family.
    SpecificChoice,
}

impl Condition {
    pub fn label(self) -> &'static str {
        match self {
            Condition::None => "no AC",
            Condition::PiPulse => "Phi=pi",
            Condition::SpecificChoice => "△",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassificationGroup {
    pub terms: &'static [Functional],
    pub symmetric: Flag,
    pub asymmetric: Flag,
    pub condition: Condition,
}

/// Expected zero/nonzero pattern for first-order designed π pulses.
pub const CLASSIFICATION_GROUPS: [ClassificationGroup; 4] = [
    ClassificationGroup {
        terms: &[
            Functional::Tau1,
            Functional::Tau2,
            Functional::Eps1Third,
            Functional::Eps1Fourth,
        ],
        symmetric: Flag::Zero,
        asymmetric: Flag::Zero,
        condition: Condition::None,
    },
    ClassificationGroup {
        terms: &[
            Functional::Eps0First,
            Functional::Eps0Fourth,
            Functional::Eps1Second,
        ],
        symmetric: Flag::Zero,
        asymmetric: Flag::Zero,
        condition: Condition::PiPulse,
    },
    ClassificationGroup {
        terms: &[Functional::Eps0Second, Functional::Eps0Third],
        symmetric: Flag::Nonzero,
        asymmetric: Flag::Nonzero,
        condition: Condition::PiPulse,
    },
    ClassificationGroup {
        terms: &[Functional::Eps1First],
        symmetric: Flag::Zero,
        asymmetric: Flag::Nonzero,
        condition: Condition::SpecificChoice,
    },
];

/// Measured flags of one group for both pulses.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupResult {
    pub group: ClassificationGroup,
    pub symmetric: Vec<Flag>,
    pub asymmetric: Vec<Flag>,
}

impl GroupResult {
    pub fn matches(&self) -> bool {
        self.symmetric.iter().all(|&f| f == self.group.symmetric)
            && self.asymmetric.iter().all(|&f| f == self.group.asymmetric)
    }

    fn column(flags: &[Flag]) -> String {
        match flags.first() {
            Some(&first) if flags.iter().all(|&f| f == first) => first.to_string(),
            _ => "mixed".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationTable {
    pub symmetric: ErrorBudget,
    pub asymmetric: ErrorBudget,
    pub symmetric_flags: BudgetClassification,
    pub asymmetric_flags: BudgetClassification,
    pub groups: Vec<GroupResult>,
}

impl ClassificationTable {
    pub fn build(
        symmetric: &DesignedPulse,
        asymmetric: &DesignedPulse,
        epsilon: f64,
        tol: f64,
    ) -> Self {
        let sb = error_budget(symmetric, epsilon);
        let ab = error_budget(asymmetric, epsilon);
        let sf = classify_budget(&sb, tol);
        let af = classify_budget(&ab, tol);
        let groups = CLASSIFICATION_GROUPS
            .iter()
            .map(|g| GroupResult {
                group: *g,
                symmetric: g.terms.iter().map(|&t| sf.flag(t)).collect(),
                asymmetric: g.terms.iter().map(|&t| af.flag(t)).collect(),
            })
            .collect();
        Self {
            symmetric: sb,
            asymmetric: ab,
            symmetric_flags: sf,
            asymmetric_flags: af,
            groups,
        }
    }

    pub fn matches_expected(&self) -> bool {
        self.groups.iter().all(GroupResult::matches)
    }

    pub fn mismatches(&self) -> Vec<Functional> {
        let mut out = Vec::new();
        for g in &self.groups {
            for (i, &term) in g.group.terms.iter().enumerate() {
                if g.symmetric[i] != g.group.symmetric || g.asymmetric[i] != g.group.asymmetric {
                    out.push(term);
                }
            }
        }
        out
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# SP = designed symmetric pi pulse, AP = asymmetric pi pulse family; zero iff |coefficient| <= {:e}",
            self.symmetric_flags.threshold.max(self.asymmetric_flags.threshold)
        );
        let _ = writeln!(
            out,
            "{:<5} {:<46} {:<4} {:<4} {:<7} {}",
            "group", "terms", "SP", "AP", "AC", "match"
        );
        for (i, g) in self.groups.iter().enumerate() {
            let names: Vec<&str> = g.group.terms.iter().map(|t| t.name()).collect();
            let _ = writeln!(
                out,
                "{:<5} {:<46} {:<4} {:<4} {:<7} {}",
                i + 1,
                names.join(","),
                GroupResult::column(&g.symmetric),
                GroupResult::column(&g.asymmetric),
                g.group.condition.label(),
                if g.matches() { "yes" } else { "NO" }
            );
        }
        out.push('\n');
        let _ = writeln!(out, "{:<12} {:>24} {:>24}", "term", "SP", "AP");
        for f in Functional::ALL {
            let _ = writeln!(
                out,
                "{:<12} {:>24.16e} {:>24.16e}",
                f.name(),
                self.symmetric.coefficient(f),
                self.asymmetric.coefficient(f)
            );
        }
        out
    }
}
