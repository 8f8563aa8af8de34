use std::collections::VecDeque;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{GenerationRequest, Generator, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailKind {
    ModelTimeout,
    EndpointError,
    Unreachable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScriptItem {
    Reply(String),
    Fail(FailKind),
}

impl ScriptItem {
    pub fn reply(text: impl Into<String>) -> Self {
        ScriptItem::Reply(text.into())
    }

    /// `"text"` or `{"fail": "ModelTimeout"}`.
    pub fn from_json(v: &Value) -> Result<Self, ModelError> {
        match v {
            Value::String(s) => Ok(ScriptItem::Reply(s.clone())),
            Value::Object(map) => {
                let kind = map
                    .get("fail")
                    .cloned()
                    .ok_or_else(|| ModelError::InvalidScript(format!("unrecognized entry {v}")))?;
                serde_json::from_value(kind)
                    .map(ScriptItem::Fail)
                    .map_err(|e| ModelError::InvalidScript(e.to_string()))
            }
            other => Err(ModelError::InvalidScript(format!("unrecognized entry {other}"))),
        }
    }
}

/// Replays a fixed script of replies and failures, one per call.
#[derive(Debug)]
pub struct ScriptedMock {
    script: Mutex<VecDeque<ScriptItem>>,
    prompts: Mutex<Vec<String>>,
}

impl ScriptedMock {
    pub fn new(items: Vec<ScriptItem>) -> Result<Self, ModelError> {
        if items.is_empty() {
            return Err(ModelError::InvalidScript("script is empty".into()));
        }
        Ok(ScriptedMock { script: Mutex::new(items.into()), prompts: Mutex::new(vec![]) })
    }

    pub fn replies<I, T>(replies: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        Self::new(replies.into_iter().map(|r| ScriptItem::Reply(r.into())).collect())
    }

    /// Parses a JSON array script.
    pub fn from_json(v: &Value) -> Result<Self, ModelError> {
        let items = v
            .as_array()
            .ok_or_else(|| ModelError::InvalidScript("script must be a JSON array".into()))?
            .iter()
            .map(ScriptItem::from_json)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(items)
    }

    pub fn remaining(&self) -> usize {
        self.script.lock().unwrap().len()
    }

    pub fn calls(&self) -> usize {
        self.prompts.lock().unwrap().len()
    }

    /// Prompts received so far, in call order.
    pub fn prompts(&self) -> Vec<String> {
        self.prompts.lock().unwrap().clone()
    }
}

impl Generator for ScriptedMock {
    fn endpoint_tag(&self) -> String {
        "scripted-mock".into()
    }

    fn generate(&self, req: &GenerationRequest) -> Result<String, ModelError> {
        self.prompts.lock().unwrap().push(req.prompt.clone());
        match self.script.lock().unwrap().pop_front() {
            None => Err(ModelError::ScriptExhausted),
            Some(ScriptItem::Reply(text)) => Ok(text),
            Some(ScriptItem::Fail(FailKind::ModelTimeout)) => Err(ModelError::ModelTimeout("scripted".into())),
            Some(ScriptItem::Fail(FailKind::EndpointError)) => Err(ModelError::EndpointError("scripted".into())),
            Some(ScriptItem::Fail(FailKind::Unreachable)) => Err(ModelError::Unreachable("scripted".into())),
        }
    }
}
