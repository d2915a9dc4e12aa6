#pragma once

#include <stdexcept>
#include <string>

namespace showwork {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: bad syntax, wrong field types, unreadable files.
/// The command line maps this to exit status 2.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Well-formed input that violates a domain rule (duplicate ids, empty runs,
/// out-of-range budgets). The command line maps this to exit status 1.
class DomainError : public Error {
public:
    using Error::Error;
};

class BudgetOutOfRange : public DomainError {
public:
    using DomainError::DomainError;
};

}  // namespace showwork
