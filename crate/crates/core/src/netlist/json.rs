use super::{LogicNetwork, NetlistError};

impl LogicNetwork {
    /// Canonical JSON: gates in id order, pretty-printed. Loading and
    /// saving again reproduces the same bytes.
    pub fn to_json(&self) -> String {
        let mut canonical = self.clone();
        canonical.gates.sort_by_key(|g| g.id);
        serde_json::to_string_pretty(&canonical).expect("networks always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, NetlistError> {
        let mut net: LogicNetwork =
            serde_json::from_str(text).map_err(|e| NetlistError::Format(e.to_string()))?;
        net.gates.sort_by_key(|g| g.id);
        Ok(net)
    }
}
