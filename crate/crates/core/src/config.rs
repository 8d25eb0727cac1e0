//! Run settings, optionally read from a TOML file. Every key is optional and
//! falls back to the shipped defaults.
//!
//! ```toml
//! stem_len = 4
//! beam = 128
//! templates = ["lex", "same-stem", "tag-pair"]
//!
//! [filter]
//! english_stopwords = ["a", "an", "the"]
//!
//! [labels]
//! default = "R"
//! roles = { ":quant" = "A" }
//! ```

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::amr2tree::LabelScheme;
use crate::error::{Error, Result};
use crate::hieralign::{DecodeParams, Template, TemplateSet};
use crate::ibm1::{DEFAULT_ITERATIONS, DEFAULT_SMOOTHING};
use crate::penman::ParseOptions;
use crate::preprocess::{normalize_role, FilterConfig, DEFAULT_STEM_LEN};

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub filter: FilterConfig,
    pub labels: LabelScheme,
    pub stem_len: usize,
    pub templates: TemplateSet,
    pub decode: DecodeParams,
    pub parse: ParseOptions,
    pub ibm1_iterations: usize,
    pub smoothing: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            filter: FilterConfig::default(),
            labels: LabelScheme::default(),
            stem_len: DEFAULT_STEM_LEN,
            templates: TemplateSet::default(),
            decode: DecodeParams::default(),
            parse: ParseOptions::default(),
            ibm1_iterations: DEFAULT_ITERATIONS,
            smoothing: DEFAULT_SMOOTHING,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSettings {
    stem_len: Option<usize>,
    beam: Option<usize>,
    window: Option<usize>,
    cap_factor: Option<usize>,
    one_link_per_amr_token: Option<bool>,
    templates: Option<Vec<String>>,
    index_base: Option<usize>,
    ibm1_iterations: Option<usize>,
    smoothing: Option<f64>,
    filter: Option<RawFilter>,
    labels: Option<RawLabels>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFilter {
    english_stopwords: Option<Vec<String>>,
    amr_roles: Option<Vec<String>>,
    amr_concepts: Option<Vec<String>>,
    strip_quotes: Option<bool>,
    strip_sense: Option<bool>,
    lowercase_roles: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLabels {
    default: Option<String>,
    roles: Option<BTreeMap<String, String>>,
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawSettings = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut s = Settings::default();
        if let Some(v) = raw.stem_len {
            if v == 0 {
                return Err(Error::Config("stem_len must be at least 1".into()));
            }
            s.stem_len = v;
        }
        if let Some(v) = raw.beam {
            if v == 0 {
                return Err(Error::Config("beam must be at least 1".into()));
            }
            s.decode.k = v;
        }
        if let Some(v) = raw.window {
            s.decode.window = v;
        }
        if let Some(v) = raw.cap_factor {
            s.decode.cap_factor = v.max(1);
        }
        if let Some(v) = raw.one_link_per_amr_token {
            s.decode.one_link_per_amr_token = v;
        }
        if let Some(names) = raw.templates {
            let list = names
                .iter()
                .map(|n| n.parse())
                .collect::<Result<Vec<Template>>>()?;
            s.templates = TemplateSet::only(&list);
        }
        if let Some(v) = raw.index_base {
            s.parse.index_base = v;
        }
        if let Some(v) = raw.ibm1_iterations {
            s.ibm1_iterations = v;
        }
        if let Some(v) = raw.smoothing {
            s.smoothing = v;
        }
        if let Some(f) = raw.filter {
            if let Some(v) = f.english_stopwords {
                s.filter.english_stopwords = v.iter().map(|w| w.to_lowercase()).collect();
            }
            if let Some(v) = f.amr_roles {
                s.filter.amr_roles = v.iter().map(|r| normalize_role(r)).collect();
            }
            if let Some(v) = f.amr_concepts {
                s.filter.amr_concepts = v.iter().map(|c| c.to_lowercase()).collect();
            }
            s.filter.strip_quotes = f.strip_quotes.unwrap_or(s.filter.strip_quotes);
            s.filter.strip_sense = f.strip_sense.unwrap_or(s.filter.strip_sense);
            s.filter.lowercase_roles = f.lowercase_roles.unwrap_or(s.filter.lowercase_roles);
        }
        if let Some(l) = raw.labels {
            if let Some(d) = l.default {
                s.labels.default_prefix = d;
            }
            if let Some(roles) = l.roles {
                s.labels.prefixes = roles
                    .into_iter()
                    .map(|(r, p)| (r.to_lowercase(), p))
                    .collect();
            }
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(Settings::from_toml("").unwrap(), Settings::default());
    }

    #[test]
    fn overrides() {
        let s = Settings::from_toml(
            "beam = 16\ntemplates = [\"lex\"]\n[filter]\namr_roles = [\":ARG0\"]\nstrip_sense = false\n[labels]\nroles = { \":Quant\" = \"Q\" }\n",
        )
        .unwrap();
        assert_eq!(s.decode.k, 16);
        assert!(s.templates.contains(Template::Lex) && !s.templates.contains(Template::Null));
        assert!(s.filter.removes_role(":arg0") && !s.filter.removes_role(":quant"));
        assert!(!s.filter.strip_sense && s.filter.strip_quotes);
        assert_eq!(s.labels.label(":quant"), "Qquant");
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(Settings::from_toml("bogus = 1").is_err());
        assert!(Settings::from_toml("beam = 0").is_err());
        assert!(Settings::from_toml("templates = [\"nope\"]").is_err());
    }
}
