//! The closed dependency-label inventory.
//!
//! Labels fall into two families: 21 syntactic (inner-EDU) relations and
//! 19 discourse (inter-EDU) relations. The declaration order below is the
//! canonical inventory order; it fixes label-matrix columns in score files
//! and breaks ties wherever a deterministic label choice is needed.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Which half of the inventory a label belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Syntactic,
    InterEdu,
}

macro_rules! labels {
    ($( $variant:ident => $name:literal, $family:ident; )*) => {
        /// A dependency relation label.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum DependencyLabel {
            $( $variant, )*
        }

        impl DependencyLabel {
            /// Every label, in inventory order.
            pub const ALL: [DependencyLabel; labels!(@count $($variant)*)] = [
                $( DependencyLabel::$variant, )*
            ];

            /// The label's surface name as it appears in treebank files.
            pub fn name(self) -> &'static str {
                match self {
                    $( DependencyLabel::$variant => $name, )*
                }
            }

            pub fn family(self) -> Family {
                match self {
                    $( DependencyLabel::$variant => Family::$family, )*
                }
            }

            /// Looks a label up by its surface name.
            pub fn from_name(name: &str) -> Option<DependencyLabel> {
                match name {
                    $( $name => Some(DependencyLabel::$variant), )*
                    _ => None,
                }
            }
        }
    };
    (@count) => { 0 };
    (@count $head:ident $($tail:ident)*) => { 1 + labels!(@count $($tail)*) };
}

labels! {
    Root => "root", Syntactic;
    SasubjObj => "sasubj-obj", Syntactic;
    Sasubj => "sasubj", Syntactic;
    Dfsubj => "dfsubj", Syntactic;
    Subj => "subj", Syntactic;
    SubjIn => "subj-in", Syntactic;
    Obj => "obj", Syntactic;
    Pred => "pred", Syntactic;
    Att => "att", Syntactic;
    Adv => "adv", Syntactic;
    Cmp => "cmp", Syntactic;
    Coo => "coo", Syntactic;
    Pobj => "pobj", Syntactic;
    Iobj => "iobj", Syntactic;
    De => "de", Syntactic;
    Adjct => "adjct", Syntactic;
    App => "app", Syntactic;
    Exp => "exp", Syntactic;
    Punc => "punc", Syntactic;
    Frag => "frag", Syntactic;
    Repet => "repet", Syntactic;
    Attr => "attr", InterEdu;
    Bckg => "bckg", InterEdu;
    Cause => "cause", InterEdu;
    Comp => "comp", InterEdu;
    Cond => "cond", InterEdu;
    Cont => "cont", InterEdu;
    Elbr => "elbr", InterEdu;
    Enbm => "enbm", InterEdu;
    Eval => "eval", InterEdu;
    Expl => "expl", InterEdu;
    Joint => "joint", InterEdu;
    Manner => "manner", InterEdu;
    Rstm => "rstm", InterEdu;
    Temp => "temp", InterEdu;
    TpChg => "tp-chg", InterEdu;
    ProbSol => "prob-sol", InterEdu;
    QstAns => "qst-ans", InterEdu;
    StmRsp => "stm-rsp", InterEdu;
    ReqProc => "req-proc", InterEdu;
}

impl DependencyLabel {
    /// Number of labels in the inventory (width of a label score row).
    pub const COUNT: usize = DependencyLabel::ALL.len();

    /// Position of the label in inventory order.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<DependencyLabel> {
        DependencyLabel::ALL.get(index).copied()
    }

    pub fn is_syntactic(self) -> bool {
        self.family() == Family::Syntactic
    }

    pub fn is_inter_edu(self) -> bool {
        self.family() == Family::InterEdu
    }

    pub fn syntactic() -> impl Iterator<Item = DependencyLabel> {
        DependencyLabel::ALL.into_iter().filter(|l| l.is_syntactic())
    }

    pub fn inter_edu() -> impl Iterator<Item = DependencyLabel> {
        DependencyLabel::ALL.into_iter().filter(|l| l.is_inter_edu())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown dependency label `{0}`")]
pub struct UnknownLabel(pub String);

impl FromStr for DependencyLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DependencyLabel::from_name(s).ok_or_else(|| UnknownLabel(s.to_string()))
    }
}

impl fmt::Display for DependencyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for DependencyLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for DependencyLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let name = String::deserialize(deserializer)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inventory_sizes() {
        assert_eq!(DependencyLabel::COUNT, 40);
        assert_eq!(DependencyLabel::syntactic().count(), 21);
        assert_eq!(DependencyLabel::inter_edu().count(), 19);
    }

    #[test]
    fn names_round_trip() {
        for label in DependencyLabel::ALL {
            assert_eq!(label.name().parse::<DependencyLabel>().unwrap(), label);
            assert_eq!(DependencyLabel::from_index(label.index()), Some(label));
        }
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert_eq!("foo".parse::<DependencyLabel>(), Err(UnknownLabel("foo".into())));
        assert!("Root".parse::<DependencyLabel>().is_err());
    }

    #[test]
    fn family_partition() {
        assert_eq!(DependencyLabel::Dfsubj.family(), Family::Syntactic);
        assert_eq!(DependencyLabel::StmRsp.family(), Family::InterEdu);
        assert_eq!(DependencyLabel::Repet.index() + 1, DependencyLabel::Attr.index());
    }
}
