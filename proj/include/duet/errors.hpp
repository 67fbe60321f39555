#pragma once

#include <stdexcept>
#include <string>

namespace duet {

/// A value lies outside the domain of an operation (bad label, absent class).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Text that does not follow a grammar (sample names, documents).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tabular data with the wrong shape or ordering.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller violated an operation's precondition.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Filesystem failures: unreadable roots, unwritable outputs.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Optimisation diverged (non-finite loss).
class TrainingError : public std::runtime_error {
public:
    TrainingError(const std::string& what, int epoch)
        : std::runtime_error(what), epoch_(epoch) {}
    [[nodiscard]] int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

}  // namespace duet
