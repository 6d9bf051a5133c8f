#pragma once

#include <stdexcept>
#include <string>

namespace semlab {

/// Bad input: malformed files, invalid flags, violated preconditions.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A request that disagrees with a trained artifact (schema, feature set,
/// label order, model file version).
class ContractError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure during training (non-finite loss, NaN features).
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace semlab
