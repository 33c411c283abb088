use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// Which scattering problem is being solved. Serialises as its tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChannelId {
    /// 1D odd-parity channel, ψ(0) = 0.
    Antisymmetric,
    /// 1D even-parity channel, ψ'(0) = 0.
    Symmetric,
    /// 3D partial wave with angular momentum ℓ.
    PartialWave(u32),
}

impl ChannelId {
    pub fn is_one_d(self) -> bool {
        !matches!(self, ChannelId::PartialWave(_))
    }

    /// Channels whose Jost function vanishes with the wavefunction at the
    /// origin (antisymmetric and every partial wave).
    pub fn is_dirichlet(self) -> bool {
        !matches!(self, ChannelId::Symmetric)
    }

    /// Short tag used in file names.
    pub fn tag(self) -> String {
        match self {
            ChannelId::Antisymmetric => "antisymmetric".into(),
            ChannelId::Symmetric => "symmetric".into(),
            ChannelId::PartialWave(l) => format!("l{l}"),
        }
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl std::str::FromStr for ChannelId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "antisymmetric" | "odd" | "-" => Ok(ChannelId::Antisymmetric),
            "symmetric" | "even" | "+" => Ok(ChannelId::Symmetric),
            _ => s
                .strip_prefix('l')
                .and_then(|l| l.parse().ok())
                .map(ChannelId::PartialWave)
                .ok_or_else(|| format!("unknown channel '{s}'")),
        }
    }
}

impl Serialize for ChannelId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.tag())
    }
}

impl<'de> Deserialize<'de> for ChannelId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
