#ifndef odflow_error_hpp
#define odflow_error_hpp

#include <stdexcept>
#include <string>

namespace odflow {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input file / column-mapping problems.
struct SchemaError : Error {
    using Error::Error;
};

// Row-level parse failures that exceeded the error budget.
struct IngestError : Error {
    using Error::Error;
};

// Violated preconditions on numeric inputs (non-stochastic matrix,
// empty window, degenerate regression design, ...).
struct DomainError : Error {
    using Error::Error;
};

}  // namespace odflow

#endif
