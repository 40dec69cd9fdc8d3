#pragma once

#include <stdexcept>
#include <string>

namespace stacksl {

// Invalid user-supplied configuration (bad key, out-of-range value).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition (dimension mismatch, index out of range).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline void expects(bool cond, const char* what) {
    if (!cond) throw ContractViolation(what);
}

}  // namespace stacksl
