#pragma once

#include <stdexcept>
#include <string>

namespace minkcsc {

/// Violated precondition on a mathematical input (non-spacelike gradient,
/// index out of range, empty support, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A query outside the range covered by computed data.
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// A constructive procedure could not produce an object with the
/// required properties.
class ConstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace minkcsc
