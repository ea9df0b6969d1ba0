#pragma once

#include <stdexcept>
#include <string>

namespace nmx {

// Every failure mode the library reports, one code per documented error.
enum class errc {
    // stats-file parsing
    malformed_header,
    unknown_column,
    row_arity_mismatch,
    non_numeric_cell,
    region_count_mismatch,
    missing_structure,
    duplicate_structure,
    region_pairing_mismatch,
    // cohort loading
    duplicate_subject_id,
    invalid_label,
    unlabeled_subject,
    // feature construction
    zero_norm_vector,
    degenerate_mean,
    // resampling / learning / evaluation
    too_few_minority_samples,
    single_class_input,
    non_finite_feature,
    arity_mismatch,
    class_too_small,
    undefined_metric,
    wrong_trace_kind,
    // configuration and IO
    invalid_spec,
    invalid_config,
    io_error,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::malformed_header: return "MalformedHeader";
        case errc::unknown_column: return "UnknownColumn";
        case errc::row_arity_mismatch: return "RowArityMismatch";
        case errc::non_numeric_cell: return "NonNumericCell";
        case errc::region_count_mismatch: return "RegionCountMismatch";
        case errc::missing_structure: return "MissingStructure";
        case errc::duplicate_structure: return "DuplicateStructure";
        case errc::region_pairing_mismatch: return "RegionPairingMismatch";
        case errc::duplicate_subject_id: return "DuplicateSubjectId";
        case errc::invalid_label: return "InvalidLabel";
        case errc::unlabeled_subject: return "UnlabeledSubject";
        case errc::zero_norm_vector: return "ZeroNormVector";
        case errc::degenerate_mean: return "DegenerateMean";
        case errc::too_few_minority_samples: return "TooFewMinoritySamples";
        case errc::single_class_input: return "SingleClassInput";
        case errc::non_finite_feature: return "NonFiniteFeature";
        case errc::arity_mismatch: return "ArityMismatch";
        case errc::class_too_small: return "ClassTooSmall";
        case errc::undefined_metric: return "UndefinedMetric";
        case errc::wrong_trace_kind: return "WrongTraceKind";
        case errc::invalid_spec: return "InvalidSpec";
        case errc::invalid_config: return "InvalidConfig";
        case errc::io_error: return "IoError";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& message) {
    throw Error(code, message);
}

// CLI exit-code classes: 2 = input/validation error, 3 = runtime/numeric error.
inline int exit_code(errc c) {
    switch (c) {
        case errc::malformed_header:
        case errc::unknown_column:
        case errc::row_arity_mismatch:
        case errc::non_numeric_cell:
        case errc::region_count_mismatch:
        case errc::missing_structure:
        case errc::duplicate_structure:
        case errc::region_pairing_mismatch:
        case errc::duplicate_subject_id:
        case errc::invalid_label:
        case errc::unlabeled_subject:
        case errc::invalid_spec:
        case errc::invalid_config:
        case errc::io_error:
            return 2;
        default:
            return 3;
    }
}

}  // namespace nmx
