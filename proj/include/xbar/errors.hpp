#ifndef XBAR_ERRORS_HPP
#define XBAR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace xbar {

// Bad user-supplied configuration: out-of-range ports, inconsistent
// weight/request matrices, malformed traffic specs.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A scheduler (or other internal component) handed us something that
// violates its contract, e.g. a match referencing an empty queue. These
// abort the run with a diagnostic; they are bugs, not user errors.
class ContractViolation : public std::logic_error {
public:
    explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

}  // namespace xbar

#endif
