#pragma once

#include <stdexcept>
#include <string>

namespace granndis {

// Error taxonomy shared by the library and the CLI exit-code contract.
// input/parse/contract map to exit code 1, capacity to exit code 2.

class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& detail)
        : std::runtime_error(detail), category_(std::move(category)) {}
    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

class InputError : public Error {
public:
    explicit InputError(const std::string& detail) : Error("input", detail) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& detail) : Error("parse", detail) {}
};

class CapacityError : public Error {
public:
    explicit CapacityError(const std::string& detail) : Error("capacity", detail) {}
};

class ContractError : public Error {
public:
    explicit ContractError(const std::string& detail) : Error("contract", detail) {}
};

class InternalError : public Error {
public:
    explicit InternalError(const std::string& detail) : Error("internal", detail) {}
};

} // namespace granndis
