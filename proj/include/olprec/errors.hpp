#pragma once

#include <stdexcept>
#include <string>

namespace olprec {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed KEEL input. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line = 0)
        : Error(line ? msg + " (line " + std::to_string(line) + ")" : msg), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Dataset unusable as a two-class problem (empty, single class, >2 classes).
class DegenerateDataset : public Error {
public:
    using Error::Error;
};

/// A class has fewer samples than the requested fold count.
class StratificationError : public Error {
public:
    using Error::Error;
};

/// k exceeds the reference-set size.
class InsufficientNeighbors : public Error {
public:
    using Error::Error;
};

/// Region or reference set contains a single class where two are required.
class SingleClassRegion : public Error {
public:
    using Error::Error;
};

/// Training set passed to a learner contains a single class.
class SingleClassTrainingSet : public Error {
public:
    using Error::Error;
};

/// Query dimensionality differs from the training dimensionality.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Operation requires a different model kind (e.g. importances on a non-tree).
class WrongModelKind : public Error {
public:
    using Error::Error;
};

/// Identical points with different labels; the SGH Oracle property is impossible.
class ContradictoryData : public Error {
public:
    using Error::Error;
};

/// Invalid run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace olprec
