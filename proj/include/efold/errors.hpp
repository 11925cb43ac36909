#pragma once

#include <stdexcept>
#include <string>

namespace efold {

// Bad numeric input (non-finite angles and the like).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Caller violated an operation's precondition.
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Invalid or inconsistent configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Checkpoint / trajectory file could not be read back.
class LoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Training diverged or a session faulted.
class RuntimeFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace efold
