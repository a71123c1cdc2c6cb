#pragma once

#include <stdexcept>
#include <string>

namespace onsetml {

/// Every failure the library can signal, by name.
enum class errc {
    // data / validation
    not_symmetric,
    too_few_values,
    constant_column,
    constant_target,
    missing_column,
    unknown_column,
    bad_value,
    layout_mismatch,
    degenerate_split,
    bad_fold_count,
    bad_design,
    too_few_rows,
    feature_mismatch,
    dimension_mismatch,
    no_class_variation,
    label_out_of_range,
    empty_matrix,
    empty_input,
    empty_table,
    empty_filter,
    unknown_variable,
    not_binary,
    bad_k,
    missing_artifact,
    // numeric
    singular_matrix,
    singular_design,
    no_convergence,
    diverged,
};

/// True for failures of the numeric kind (divergence, singularity) as opposed
/// to bad inputs. The CLI maps these to a distinct exit code.
inline bool is_numeric_failure(errc c) {
    switch (c) {
        case errc::singular_matrix:
        case errc::singular_design:
        case errc::no_convergence:
        case errc::diverged:
            return true;
        default:
            return false;
    }
}

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::not_symmetric: return "NotSymmetric";
        case errc::too_few_values: return "TooFewValues";
        case errc::constant_column: return "ConstantColumn";
        case errc::constant_target: return "ConstantTarget";
        case errc::missing_column: return "MissingColumn";
        case errc::unknown_column: return "UnknownColumn";
        case errc::bad_value: return "BadValue";
        case errc::layout_mismatch: return "LayoutMismatch";
        case errc::degenerate_split: return "DegenerateSplit";
        case errc::bad_fold_count: return "BadFoldCount";
        case errc::bad_design: return "BadDesign";
        case errc::too_few_rows: return "TooFewRows";
        case errc::feature_mismatch: return "FeatureMismatch";
        case errc::dimension_mismatch: return "DimensionMismatch";
        case errc::no_class_variation: return "NoClassVariation";
        case errc::label_out_of_range: return "LabelOutOfRange";
        case errc::empty_matrix: return "EmptyMatrix";
        case errc::empty_input: return "EmptyInput";
        case errc::empty_table: return "EmptyTable";
        case errc::empty_filter: return "EmptyFilter";
        case errc::unknown_variable: return "UnknownVariable";
        case errc::not_binary: return "NotBinary";
        case errc::bad_k: return "BadK";
        case errc::missing_artifact: return "MissingArtifact";
        case errc::singular_matrix: return "SingularMatrix";
        case errc::singular_design: return "SingularDesign";
        case errc::no_convergence: return "NoConvergence";
        case errc::diverged: return "Diverged";
    }
    return "Error";
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

}  // namespace onsetml
