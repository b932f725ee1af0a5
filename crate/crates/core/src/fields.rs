//! The 22 ESI research fields used to break down publication and
//! citation counts.

use std::fmt;

/// One of the 22 Essential Science Indicators research fields.
///
/// The enumeration is closed: [`FieldId::parse`] accepts exactly the
/// canonical names returned by [`FieldId::name`] and nothing else.
/// Variant order is the canonical (alphabetical) display order and is
/// what `BTreeMap<FieldId, _>` iteration follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FieldId {
    AgriculturalSciences,
    BiologyBiochemistry,
    Chemistry,
    ClinicalMedicine,
    ComputerScience,
    EconomicsBusiness,
    Engineering,
    EnvironmentEcology,
    Geosciences,
    Immunology,
    MaterialsScience,
    Mathematics,
    Microbiology,
    MolecularBiologyGenetics,
    Multidisciplinary,
    NeuroscienceBehavior,
    PharmacologyToxicology,
    Physics,
    PlantAnimalScience,
    PsychiatryPsychology,
    SocialSciencesGeneral,
    SpaceScience,
}

impl FieldId {
    /// Number of research fields in the scheme.
    pub const COUNT: usize = 22;

    /// All fields in canonical order.
    pub const ALL: [FieldId; Self::COUNT] = [
        FieldId::AgriculturalSciences,
        FieldId::BiologyBiochemistry,
        FieldId::Chemistry,
        FieldId::ClinicalMedicine,
        FieldId::ComputerScience,
        FieldId::EconomicsBusiness,
        FieldId::Engineering,
        FieldId::EnvironmentEcology,
        FieldId::Geosciences,
        FieldId::Immunology,
        FieldId::MaterialsScience,
        FieldId::Mathematics,
        FieldId::Microbiology,
        FieldId::MolecularBiologyGenetics,
        FieldId::Multidisciplinary,
        FieldId::NeuroscienceBehavior,
        FieldId::PharmacologyToxicology,
        FieldId::Physics,
        FieldId::PlantAnimalScience,
        FieldId::PsychiatryPsychology,
        FieldId::SocialSciencesGeneral,
        FieldId::SpaceScience,
    ];

    /// Canonical field name as it appears in data files.
    pub fn name(self) -> &'static str {
        match self {
            FieldId::AgriculturalSciences => "Agricultural Sciences",
            FieldId::BiologyBiochemistry => "Biology & Biochemistry",
            FieldId::Chemistry => "Chemistry",
            FieldId::ClinicalMedicine => "Clinical Medicine",
            FieldId::ComputerScience => "Computer Science",
            FieldId::EconomicsBusiness => "Economics & Business",
            FieldId::Engineering => "Engineering",
            FieldId::EnvironmentEcology => "Environment/Ecology",
            FieldId::Geosciences => "Geosciences",
            FieldId::Immunology => "Immunology",
            FieldId::MaterialsScience => "Materials Science",
            FieldId::Mathematics => "Mathematics",
            FieldId::Microbiology => "Microbiology",
            FieldId::MolecularBiologyGenetics => "Molecular Biol. & Genetics",
            FieldId::Multidisciplinary => "Multidisciplinary",
            FieldId::NeuroscienceBehavior => "Neuroscience & Behavior",
            FieldId::PharmacologyToxicology => "Pharmaco. & Toxicology",
            FieldId::Physics => "Physics",
            FieldId::PlantAnimalScience => "Plant & Animal Science",
            FieldId::PsychiatryPsychology => "Psychiatry/Psychology",
            FieldId::SocialSciencesGeneral => "Social Sciences, general",
            FieldId::SpaceScience => "Space Science",
        }
    }

    /// Parses a canonical field name. Surrounding whitespace is ignored;
    /// anything else, including case differences, is rejected.
    pub fn parse(s: &str) -> Option<FieldId> {
        let s = s.trim();
        Self::ALL.iter().copied().find(|f| f.name() == s)
    }

    /// Position of the field in [`FieldId::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for FieldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
