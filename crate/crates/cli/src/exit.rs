//! Process exit codes, one per error category.

use apr_core::AprError;

pub const OK: i32 = 0;
pub const INTERNAL: i32 = 1;
pub const USAGE: i32 = 2;
pub const VALIDATION: i32 = 3;
pub const CONFIG: i32 = 4;
pub const IO: i32 = 5;
pub const FORMAT: i32 = 6;
pub const RESOLUTION_REQUIRED: i32 = 7;

pub fn code_for(err: &AprError) -> i32 {
    match err {
        AprError::Validation(_) | AprError::Taxonomy(_) | AprError::Vocabulary(_) => VALIDATION,
        AprError::Config(_) => CONFIG,
        AprError::Io { .. } => IO,
        AprError::Format { .. } => FORMAT,
        AprError::ResolutionRequired { .. } => RESOLUTION_REQUIRED,
        AprError::InvalidInput(_) => USAGE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn categories_get_distinct_nonzero_codes() {
        let errors = [
            AprError::Validation(vec![]),
            AprError::Config("x".into()),
            AprError::Format {
                locator: "l".into(),
                message: "m".into(),
            },
            AprError::ResolutionRequired { pairs: vec![] },
            AprError::InvalidInput("x".into()),
        ];
        let mut codes: Vec<i32> = errors.iter().map(code_for).collect();
        assert!(codes.iter().all(|&c| c != OK));
        codes.sort();
        codes.dedup();
        assert_eq!(codes.len(), errors.len());
    }
}
