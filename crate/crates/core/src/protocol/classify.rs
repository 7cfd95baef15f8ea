use super::plan::CaseTag;
use crate::equilibria::is_non_degenerate;
use crate::error::{Error, Result};
use crate::game::{Game, MixedProfile};

/// Which construction applies to `(sigma, target)`. Requires `sigma` to be a
/// non-degenerate equilibrium and `target` to strictly Pareto-improve it.
pub fn classify_case(game: &Game, sigma: &MixedProfile, target: &[usize]) -> Result<CaseTag> {
    game.check_profile(target)?;
    let report = is_non_degenerate(game, sigma)?;
    if !report.non_degenerate {
        return Err(Error::Degenerate(format!(
            "baseline equilibrium is degenerate (det {:.3e}, threshold {:.3e}, min residual {:.3e})",
            report.det, report.det_threshold, report.min_residual
        )));
    }
    let pareto = game.pareto_improves(target, sigma)?;
    if !pareto.improves {
        return Err(Error::Hypothesis(format!("target does not strictly improve every player's payoff (margin {:.3e})", pareto.margin)));
    }
    Ok(shape_case(game, sigma, target))
}

/// The case split on support shape alone, without hypothesis checks.
pub fn shape_case(game: &Game, sigma: &MixedProfile, target: &[usize]) -> CaseTag {
    let supports = sigma.supports();
    let inside: Vec<bool> = target.iter().enumerate().map(|(i, a)| supports[i].contains(a)).collect();
    let counts = game.action_counts();
    if inside.iter().all(|x| !x) {
        CaseTag::PartialSupportDisjoint
    } else if inside.iter().any(|x| !x) {
        CaseTag::PartialSupportMixed
    } else if !sigma.has_full_support() {
        CaseTag::InSupportIndirect
    } else if counts.len() == 2 && counts == [2, 2] {
        CaseTag::TwoByTwo
    } else if counts.len() == 2 {
        CaseTag::FullSupport2p
    } else {
        CaseTag::FullSupportNp
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn catalog_cases() {
        let uniform3 = MixedProfile::uniform_on(&[4, 4], &[vec![0, 1, 2], vec![0, 1, 2]]);
        assert_eq!(classify_case(&catalog::rps_with_exit(), &uniform3, &[3, 3]).unwrap(), CaseTag::PartialSupportDisjoint);
        assert_eq!(classify_case(&catalog::rps_with_exit_variant(), &uniform3, &[3, 2]).unwrap(), CaseTag::PartialSupportMixed);
        let g = catalog::unfair_split();
        let aa = MixedProfile::pure(&[2, 2], &[0, 0]);
        // (B,B) pays the column player less than (A,A)
        assert!(matches!(classify_case(&g, &aa, &[1, 1]), Err(Error::Hypothesis(_))));
        assert_eq!(shape_case(&g, &aa, &[1, 1]), CaseTag::PartialSupportDisjoint);
    }
}
