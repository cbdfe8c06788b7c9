#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fracasym {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Two grid functions that must share a mesh do not.
class GridMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An improper integral whose tail model cannot close it.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Contraction hypotheses fail and the caller did not ask to proceed anyway.
class HypothesisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input (coefficient text, config, CSV/JSON file).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset = 0)
        : std::runtime_error(what), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

}  // namespace fracasym
