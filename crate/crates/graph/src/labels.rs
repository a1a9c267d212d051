use std::collections::HashMap;

/// Dictionary encoding of vertex and edge labels.
#[derive(Clone, Debug, Default)]
pub struct LabelDict {
    names: Vec<String>,
    codes: HashMap<String, u32>,
}

impl LabelDict {
    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(c) = self.codes.get(name) {
            return *c;
        }
        let c = self.names.len() as u32;
        self.names.push(name.to_string());
        self.codes.insert(name.to_string(), c);
        c
    }

    pub fn code(&self, name: &str) -> Option<u32> {
        self.codes.get(name).copied()
    }

    pub fn name(&self, code: u32) -> &str {
        &self.names[code as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}
