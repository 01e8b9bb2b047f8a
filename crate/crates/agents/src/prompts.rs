//! The prompt catalog. Templates live as JSON data files under `prompts/`
//! so their text stays diffable; rendering substitutes only the declared
//! placeholders (written `{name}`), leaving every other brace untouched.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::AgentError;
use crate::types::ChatMessage;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub id: String,
    pub system: String,
    pub user: String,
    pub required_placeholders: Vec<String>,
}

pub const TEMPLATE_IDS: [&str; 8] = [
    "goal_clarify",
    "constraints_clarify",
    "search_query",
    "literature_summarize",
    "hypothesis_generate",
    "hypothesis_refine",
    "variables_extract",
    "report_write",
];

const TEMPLATE_SOURCES: [(&str, &str); 8] = [
    ("goal_clarify", include_str!("../prompts/goal_clarify.json")),
    (
        "constraints_clarify",
        include_str!("../prompts/constraints_clarify.json"),
    ),
    ("search_query", include_str!("../prompts/search_query.json")),
    (
        "literature_summarize",
        include_str!("../prompts/literature_summarize.json"),
    ),
    (
        "hypothesis_generate",
        include_str!("../prompts/hypothesis_generate.json"),
    ),
    (
        "hypothesis_refine",
        include_str!("../prompts/hypothesis_refine.json"),
    ),
    (
        "variables_extract",
        include_str!("../prompts/variables_extract.json"),
    ),
    ("report_write", include_str!("../prompts/report_write.json")),
];

#[derive(Debug, Clone)]
pub struct PromptCatalog {
    templates: BTreeMap<String, PromptTemplate>,
}

impl PromptCatalog {
    /// Loads the embedded catalog. Panics only on a corrupted build (the
    /// data files are compiled in).
    pub fn embedded() -> Self {
        let mut templates = BTreeMap::new();
        for (id, source) in TEMPLATE_SOURCES {
            let template: PromptTemplate =
                serde_json::from_str(source).unwrap_or_else(|e| panic!("template {id}: {e}"));
            assert_eq!(template.id, id, "template file id mismatch");
            for placeholder in &template.required_placeholders {
                assert!(
                    template.user.contains(&format!("{{{placeholder}}}")),
                    "template {id} is missing placeholder {placeholder}"
                );
            }
            templates.insert(template.id.clone(), template);
        }
        Self { templates }
    }

    pub fn get(&self, id: &str) -> Result<&PromptTemplate, AgentError> {
        self.templates
            .get(id)
            .ok_or_else(|| AgentError::UnknownTemplate(id.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.templates.keys().map(String::as_str)
    }

    /// System + user message pair with every `{name}` slot substituted.
    /// All declared placeholders must be supplied; extra entries error.
    pub fn render(
        &self,
        id: &str,
        values: &BTreeMap<String, String>,
    ) -> Result<Vec<ChatMessage>, AgentError> {
        let template = self.get(id)?;
        for name in values.keys() {
            if !template.required_placeholders.contains(name) {
                return Err(AgentError::UnknownPlaceholder {
                    template: id.to_string(),
                    placeholder: name.clone(),
                });
            }
        }
        let mut user = template.user.clone();
        for name in &template.required_placeholders {
            let value = values
                .get(name)
                .ok_or_else(|| AgentError::MissingPlaceholder {
                    template: id.to_string(),
                    placeholder: name.clone(),
                })?;
            user = user.replace(&format!("{{{name}}}"), value);
        }
        Ok(vec![
            ChatMessage::system(template.system.clone()),
            ChatMessage::user(user),
        ])
    }
}

impl Default for PromptCatalog {
    fn default() -> Self {
        Self::embedded()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_holds_all_eight_templates() {
        let catalog = PromptCatalog::embedded();
        let ids: Vec<&str> = catalog.ids().collect();
        assert_eq!(ids.len(), 8);
        for id in TEMPLATE_IDS {
            assert!(ids.contains(&id), "missing template {id}");
        }
    }

    #[test]
    fn render_substitutes_only_declared_placeholders() {
        let catalog = PromptCatalog::embedded();
        let mut values = BTreeMap::new();
        values.insert("hypothesis".to_string(), "increase helix_radius".to_string());
        let messages = catalog.render("variables_extract", &values).unwrap();
        assert_eq!(messages.len(), 2);
        assert!(messages[1].content.contains("increase helix_radius"));
        assert!(!messages[1].content.contains("{hypothesis}"));
        // the literal example dict in the template must survive rendering
        assert!(messages[1]
            .content
            .contains("{'variables': ['var1', 'var2'], 'values': [val1, val2]}"));
    }

    #[test]
    fn render_rejects_missing_and_unknown_placeholders() {
        let catalog = PromptCatalog::embedded();
        assert!(matches!(
            catalog.render("goal_clarify", &BTreeMap::new()),
            Err(AgentError::MissingPlaceholder { .. })
        ));
        let mut values = BTreeMap::new();
        values.insert("research_goal".to_string(), "x".to_string());
        values.insert("bogus".to_string(), "y".to_string());
        assert!(matches!(
            catalog.render("goal_clarify", &values),
            Err(AgentError::UnknownPlaceholder { .. })
        ));
        assert!(matches!(
            catalog.render("nope", &BTreeMap::new()),
            Err(AgentError::UnknownTemplate(_))
        ));
    }

    #[test]
    fn refine_template_embeds_the_parameter_listing() {
        let catalog = PromptCatalog::embedded();
        let template = catalog.get("hypothesis_refine").unwrap();
        for needle in [
            "angle: [0.123160654, 1.009814211]",
            "curl: [0.628318531, 8.078381109]",
            "fiber_radius: [20, 60]",
            "height: [43.32551229, 954.9296586]",
            "helix_radius: [20, 90]",
            "n_turns: [3, 10] (integer values only)",
            "pitch: [60, 200]",
            "total_fiber_length: [303.7757835, 1127.781297]",
            "total_length: [300, 650]",
        ] {
            assert!(
                template.user.contains(needle),
                "refine template missing `{needle}`"
            );
        }
        let extract = catalog.get("variables_extract").unwrap();
        assert!(extract
            .user
            .contains("n_turns: [3, 10] (integer values only)"));
    }
}
