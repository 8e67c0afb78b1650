#pragma once

#include <stdexcept>
#include <string>

namespace tsnn {

// Error categories map one-to-one onto CLI exit codes (usage=1, data=2,
// computation=3).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept = 0;
    virtual int exit_code() const noexcept = 0;
};

class UsageError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "usage"; }
    int exit_code() const noexcept override { return 1; }
};

class DataError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "data"; }
    int exit_code() const noexcept override { return 2; }
};

class ComputationError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "computation"; }
    int exit_code() const noexcept override { return 3; }
};

}  // namespace tsnn
