//! Textual scene summaries for LLM queries.

use serde::{Deserialize, Serialize};

use super::{LlmError, Result};
use crate::data::SceneRecord;

/// How one attribute is rendered. `{value}` in `numeric` is replaced by the
/// attribute value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureClause {
    pub feature: String,
    /// Used when the value is non-zero (binary attributes).
    #[serde(default)]
    pub when_present: Option<String>,
    /// Used when the value is zero (binary attributes).
    #[serde(default)]
    pub when_absent: Option<String>,
    /// Used for count-like attributes; takes precedence over the binary pair.
    #[serde(default)]
    pub numeric: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneTemplate {
    pub clauses: Vec<FeatureClause>,
    /// Attributes whose name starts with one of these prefixes are not rendered.
    pub skip_prefixes: Vec<String>,
}

impl Default for SceneTemplate {
    fn default() -> Self {
        let binary = |f: &str, yes: &str, no: &str| FeatureClause {
            feature: f.into(),
            when_present: Some(yes.into()),
            when_absent: Some(no.into()),
            numeric: None,
        };
        let count = |f: &str, text: &str| FeatureClause {
            feature: f.into(),
            when_present: None,
            when_absent: None,
            numeric: Some(text.into()),
        };
        SceneTemplate {
            clauses: vec![
                binary("music_playing", "Music is playing.", "No music is playing."),
                count("num_people", "There are {value} people in the room."),
                count("num_people_in_group", "{value} people are standing in a group."),
                binary("people_facing_robot", "People are facing the robot.", "Nobody is facing the robot."),
                binary("robot_facing_people", "The robot is facing people.", "The robot is not facing people."),
                binary("people_eating", "People are eating.", "Nobody is eating."),
                binary("people_sleeping", "Someone is sleeping.", "Nobody is sleeping."),
                binary("child_present", "A child is present.", "No child is present."),
                binary("animal_present", "A pet is present.", "No pet is present."),
            ],
            skip_prefixes: vec!["robot_pepper".into(), "robot_pr2".into(), "robot_nao".into()],
        }
    }
}

/// `carrying_warm_food` → `carrying warm food`.
pub fn humanize(slug: &str) -> String {
    slug.split('_')
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

fn format_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Renders the prompt for one scene and action.
///
/// The text names the robot type, enumerates the scene attributes in
/// feature order, asks about `action` and lists the five appropriateness
/// options.
pub fn describe_scene(
    template: &SceneTemplate,
    scene: &SceneRecord,
    feature_names: &[String],
    action: &str,
) -> Result<String> {
    if scene.features.len() != feature_names.len() {
        return Err(LlmError::UnknownFeature {
            expected: feature_names.len(),
            found: scene.features.len(),
        });
    }
    let mut clauses = Vec::new();
    for (name, &v) in feature_names.iter().zip(&scene.features) {
        if template.skip_prefixes.iter().any(|p| name.starts_with(p.as_str())) {
            continue;
        }
        let rule = template.clauses.iter().find(|c| &c.feature == name);
        let text = match rule {
            Some(FeatureClause {
                numeric: Some(fmt), ..
            }) => fmt.replace("{value}", &format_value(v)),
            Some(FeatureClause {
                when_present: Some(yes),
                when_absent: Some(no),
                ..
            }) => {
                if v != 0.0 {
                    yes.clone()
                } else {
                    no.clone()
                }
            }
            _ => {
                let label = humanize(name);
                if v == 0.0 || v == 1.0 {
                    format!("{}: {}.", label, if v == 1.0 { "yes" } else { "no" })
                } else {
                    format!("{}: {}.", label, format_value(v))
                }
            }
        };
        clauses.push(text);
    }
    Ok(format!(
        "Consider a home scene with a {robot} robot. {scene_text}\n\
         How appropriate is it for the robot to perform the action \"{action}\" in this scene? \
         Answer with a single number: 1 (very inappropriate), 2 (inappropriate), 3 (neutral), \
         4 (appropriate) or 5 (very appropriate).\nAnswer:",
        robot = scene.robot_type,
        scene_text = clauses.join(" "),
        action = humanize(action),
    ))
}
