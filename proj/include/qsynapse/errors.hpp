#pragma once

#include <stdexcept>
#include <string>

namespace qsynapse {

// Common base so the CLI can map failures to exit codes in one place.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Eigensolver input failed the hermiticity precondition.
struct NotHermitian : Error {
    using Error::Error;
};

// A conserved quantity drifted past its monitored tolerance mid-run.
struct InvariantViolation : Error {
    using Error::Error;
};

// A projective collapse was requested for an outcome of ~zero probability.
struct ZeroProbabilityOutcome : Error {
    using Error::Error;
};

// Config / CSV parsing failure, with line or field diagnostics in what().
struct ParseError : Error {
    using Error::Error;
};

} // namespace qsynapse
