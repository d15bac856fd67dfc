use std::borrow::Borrow;
use std::collections::BTreeSet;
use std::fmt;

use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::country::CountryCode;

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_string())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{:?}", self.0)
            }
        }
    };
}

string_id!(
    /// Stable institution identifier from the registry.
    InstitutionId
);
string_id!(
    /// Stable author identifier supplied by the input (no disambiguation).
    AuthorId
);
string_id!(RecordId);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DocType {
    Article,
    Review,
    Other(String),
}

impl DocType {
    /// Lower-cases and trims; anything that is not an article or review is
    /// kept as `Other`.
    pub fn parse(raw: &str) -> Self {
        let norm = raw.trim().to_lowercase();
        match norm.as_str() {
            "article" => DocType::Article,
            "review" => DocType::Review,
            _ => DocType::Other(norm),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            DocType::Article => "article",
            DocType::Review => "review",
            DocType::Other(s) => s,
        }
    }

    pub fn default_filter() -> BTreeSet<DocType> {
        [DocType::Article, DocType::Review].into_iter().collect()
    }
}

impl Serialize for DocType {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for DocType {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(DocType::parse(&String::deserialize(deserializer)?))
    }
}

/// An affiliation either resolved against the registry or kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum InstitutionRef {
    Resolved(InstitutionId),
    Unresolved(String),
}

impl InstitutionRef {
    pub fn resolved(&self) -> Option<&InstitutionId> {
        match self {
            InstitutionRef::Resolved(id) => Some(id),
            InstitutionRef::Unresolved(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffiliationRef {
    pub institution: InstitutionRef,
    pub country: CountryCode,
}

impl AffiliationRef {
    pub fn resolved(id: impl Into<InstitutionId>, country: CountryCode) -> Self {
        Self {
            institution: InstitutionRef::Resolved(id.into()),
            country,
        }
    }

    pub fn institution_id(&self) -> Option<&InstitutionId> {
        self.institution.resolved()
    }
}

// Canonical form: `{"institution_id": .., "country": ..}` when resolved,
// `{"institution": .., "country": ..}` otherwise.
impl Serialize for AffiliationRef {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(2))?;
        match &self.institution {
            InstitutionRef::Resolved(id) => map.serialize_entry("institution_id", id)?,
            InstitutionRef::Unresolved(raw) => map.serialize_entry("institution", raw)?,
        }
        map.serialize_entry("country", &self.country)?;
        map.end()
    }
}

impl<'de> Deserialize<'de> for AffiliationRef {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct AffVisitor;

        impl<'de> Visitor<'de> for AffVisitor {
            type Value = AffiliationRef;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an affiliation object")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
                let mut institution = None;
                let mut country = None;
                while let Some(key) = map.next_key::<String>()? {
                    match key.as_str() {
                        "institution_id" => {
                            institution = Some(InstitutionRef::Resolved(map.next_value()?))
                        }
                        "institution" => {
                            institution = Some(InstitutionRef::Unresolved(map.next_value()?))
                        }
                        "country" => country = Some(map.next_value()?),
                        _ => {
                            map.next_value::<de::IgnoredAny>()?;
                        }
                    }
                }
                Ok(AffiliationRef {
                    institution: institution.ok_or_else(|| de::Error::missing_field("institution_id"))?,
                    country: country.ok_or_else(|| de::Error::missing_field("country"))?,
                })
            }
        }

        deserializer.deserialize_map(AffVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorEntry {
    pub author_id: AuthorId,
    /// Position 0 is the primary affiliation; the rest are secondary.
    pub affiliations: Vec<AffiliationRef>,
}

impl AuthorEntry {
    pub fn new(author_id: impl Into<AuthorId>, affiliations: Vec<AffiliationRef>) -> Self {
        Self {
            author_id: author_id.into(),
            affiliations,
        }
    }

    pub fn institution_ids(&self) -> impl Iterator<Item = &InstitutionId> {
        self.affiliations.iter().filter_map(AffiliationRef::institution_id)
    }

    pub fn lists(&self, institution: &str) -> bool {
        self.institution_ids().any(|id| id.as_str() == institution)
    }

    /// Position of `institution` in this entry's affiliation list.
    pub fn position_of(&self, institution: &str) -> Option<usize> {
        self.affiliations
            .iter()
            .position(|a| a.institution_id().is_some_and(|id| id.as_str() == institution))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub record_id: RecordId,
    pub year: i32,
    pub doc_type: DocType,
    #[serde(default)]
    pub subject_categories: BTreeSet<String>,
    /// Ordered; position 0 is the first author.
    pub authors: Vec<AuthorEntry>,
    #[serde(default)]
    pub corresponding_author_ids: BTreeSet<AuthorId>,
}

impl PublicationRecord {
    pub fn first_author(&self) -> Option<&AuthorEntry> {
        self.authors.first()
    }

    /// Resolved institutions listed anywhere on the record, deduplicated.
    pub fn institutions(&self) -> BTreeSet<&InstitutionId> {
        self.authors.iter().flat_map(AuthorEntry::institution_ids).collect()
    }

    pub fn lists(&self, institution: &str) -> bool {
        self.authors.iter().any(|a| a.lists(institution))
    }

    pub fn countries(&self) -> BTreeSet<CountryCode> {
        self.authors
            .iter()
            .flat_map(|a| a.affiliations.iter().map(|af| af.country))
            .collect()
    }

    pub fn entry_for(&self, author: &str) -> Option<&AuthorEntry> {
        self.authors.iter().find(|a| a.author_id.as_str() == author)
    }
}
