//! Solver-variant tokens shared by the subcommands.
//!
//! Tokens: `bicg[:r0|:atr0]`, `bicg-conv:none|left|right|two-sided`,
//! `pbicg-right`, `pbicg-left`, `pbicg-std[:isrv1|:isrv2|:isrv3|:r0|:atr0]`,
//! `pbicg-impr2`, `bicr`.

use bilanczos::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsrvName {
    R0,
    Isrv1,
    Isrv2,
    Isrv3,
    AtR0,
}

impl IsrvName {
    pub fn parse(s: &str) -> Result<Self, String> {
        Ok(match s {
            "r0" => Self::R0,
            "isrv1" => Self::Isrv1,
            "isrv2" => Self::Isrv2,
            "isrv3" => Self::Isrv3,
            "atr0" => Self::AtR0,
            other => {
                return Err(format!(
                    "unknown isrv `{other}` (r0, isrv1, isrv2, isrv3, atr0)"
                ))
            }
        })
    }

    pub fn spec(self) -> IsrvSpec {
        match self {
            Self::R0 => IsrvSpec::R0,
            Self::Isrv1 => IsrvSpec::Isrv1,
            Self::Isrv2 => IsrvSpec::Isrv2,
            Self::Isrv3 => IsrvSpec::Isrv3,
            Self::AtR0 => IsrvSpec::AtR0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::R0 => "r0",
            Self::Isrv1 => "isrv1",
            Self::Isrv2 => "isrv2",
            Self::Isrv3 => "isrv3",
            Self::AtR0 => "atr0",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Bicg(IsrvName),
    BicgConv(PrecSide),
    PbicgRight,
    PbicgLeft,
    PbicgStd(IsrvName),
    PbicgImpr2,
    Bicr,
}

impl Variant {
    pub fn parse(token: &str) -> Result<Self, String> {
        let (head, arg) = match token.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (token, None),
        };
        match head {
            "bicg" => Ok(Self::Bicg(match arg {
                None => IsrvName::R0,
                Some(s) => IsrvName::parse(s)?,
            })),
            "bicg-conv" => {
                let side = match arg.ok_or("bicg-conv needs a side, e.g. bicg-conv:left")? {
                    "none" => PrecSide::None,
                    "left" => PrecSide::Left,
                    "right" => PrecSide::Right,
                    "two-sided" => PrecSide::TwoSided,
                    other => {
                        return Err(format!(
                            "unknown side `{other}` (none, left, right, two-sided)"
                        ))
                    }
                };
                Ok(Self::BicgConv(side))
            }
            "pbicg-right" => no_arg(arg, token, Self::PbicgRight),
            "pbicg-left" => no_arg(arg, token, Self::PbicgLeft),
            "pbicg-std" => Ok(Self::PbicgStd(match arg {
                None => IsrvName::Isrv1,
                Some(s) => IsrvName::parse(s)?,
            })),
            "pbicg-impr2" => no_arg(arg, token, Self::PbicgImpr2),
            "bicr" => no_arg(arg, token, Self::Bicr),
            other => Err(format!("unknown method `{other}`")),
        }
    }

    /// Stable column label for CSV headers.
    pub fn label(&self) -> String {
        match self {
            Self::Bicg(isrv) => format!("bicg-{}", isrv.label()),
            Self::BicgConv(side) => match side {
                PrecSide::None => "bicg-conv-none".into(),
                PrecSide::Left => "bicg-conv-left".into(),
                PrecSide::Right => "bicg-conv-right".into(),
                PrecSide::TwoSided => "bicg-conv-two-sided".into(),
            },
            Self::PbicgRight => "pbicg-right".into(),
            Self::PbicgLeft => "pbicg-left".into(),
            Self::PbicgStd(isrv) => format!("pbicg-std-{}", isrv.label()),
            Self::PbicgImpr2 => "pbicg-impr2".into(),
            Self::Bicr => "bicr".into(),
        }
    }

    pub fn run(
        &self,
        a: &CsrMatrix,
        b: &[f64],
        x0: &[f64],
        p: &dyn Preconditioner,
        cfg: &SolverConfig,
    ) -> Result<SolveResult, SolverError> {
        match self {
            Self::Bicg(isrv) => bicg(a, b, x0, &isrv.spec(), cfg),
            Self::BicgConv(side) => bicg_converted(a, b, x0, p, *side, cfg),
            Self::PbicgRight => pbicg_right(a, b, x0, p, cfg),
            Self::PbicgLeft => pbicg_left(a, b, x0, p, cfg),
            Self::PbicgStd(isrv) => pbicg_standard(a, b, x0, p, &isrv.spec(), cfg),
            Self::PbicgImpr2 => pbicg_improved2(a, b, x0, p, cfg),
            Self::Bicr => bicr(a, b, x0, cfg),
        }
    }

    /// The converted-system form this variant's trace lives in, when the
    /// verification oracles define one for it.
    pub fn system_form(&self) -> Option<SystemForm> {
        Some(match self {
            Self::Bicg(IsrvName::R0) => SystemForm::Bicg,
            Self::Bicg(IsrvName::AtR0) => SystemForm::Bicr,
            Self::Bicg(_) => SystemForm::Bicg,
            Self::BicgConv(PrecSide::None) => SystemForm::Bicg,
            Self::BicgConv(PrecSide::Left) => SystemForm::ConvertedLeft,
            Self::BicgConv(PrecSide::Right) => SystemForm::ConvertedRight,
            Self::BicgConv(PrecSide::TwoSided) => SystemForm::ConvertedTwoSided,
            Self::PbicgRight => SystemForm::Right,
            Self::PbicgLeft => SystemForm::Left,
            Self::PbicgStd(IsrvName::Isrv1) => SystemForm::StandardIsrv1,
            Self::PbicgStd(IsrvName::Isrv2) => SystemForm::StandardIsrv2,
            Self::PbicgStd(IsrvName::Isrv3) => SystemForm::StandardIsrv3,
            Self::PbicgStd(_) => return None,
            Self::PbicgImpr2 => SystemForm::Improved2,
            Self::Bicr => SystemForm::Bicr,
        })
    }
}

fn no_arg(arg: Option<&str>, token: &str, v: Variant) -> Result<Variant, String> {
    match arg {
        None => Ok(v),
        Some(_) => Err(format!("`{token}`: this method takes no `:` argument")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_tokens() {
        assert_eq!(Variant::parse("bicg").unwrap(), Variant::Bicg(IsrvName::R0));
        assert_eq!(
            Variant::parse("pbicg-std").unwrap(),
            Variant::PbicgStd(IsrvName::Isrv1)
        );
        assert_eq!(
            Variant::parse("pbicg-std:isrv3").unwrap(),
            Variant::PbicgStd(IsrvName::Isrv3)
        );
        assert_eq!(
            Variant::parse("bicg-conv:two-sided").unwrap(),
            Variant::BicgConv(PrecSide::TwoSided)
        );
        assert!(Variant::parse("bicg-conv").is_err());
        assert!(Variant::parse("pbicg-right:x").is_err());
        assert!(Variant::parse("cgs").is_err());
    }
}
