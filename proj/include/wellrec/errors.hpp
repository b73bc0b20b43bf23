#ifndef WELLREC_ERRORS_HPP
#define WELLREC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wellrec {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// File could not be opened or read.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// Header is missing a required column or a cell cannot be parsed.
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& msg) : Error(msg) {}
};

class EmptyDatasetError : public Error {
public:
    explicit EmptyDatasetError(const std::string& msg) : Error(msg) {}
};

// A well referenced by the interaction set has no feature row.
class CoverageError : public Error {
public:
    explicit CoverageError(const std::string& msg) : Error(msg) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

class IndexError : public Error {
public:
    explicit IndexError(const std::string& msg) : Error(msg) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Non-finite value encountered during training.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

class FormatError : public Error {
public:
    explicit FormatError(const std::string& msg) : Error(msg) {}
};

class VersionError : public Error {
public:
    explicit VersionError(const std::string& msg) : Error(msg) {}
};

// Model and dataset disagree on feature dimensionality.
class MismatchError : public Error {
public:
    explicit MismatchError(const std::string& msg) : Error(msg) {}
};

class EvaluationError : public Error {
public:
    explicit EvaluationError(const std::string& msg) : Error(msg) {}
};

// Every company already observes the entire well catalog.
class SaturationError : public Error {
public:
    explicit SaturationError(const std::string& msg) : Error(msg) {}
};

class DegeneratePairError : public Error {
public:
    explicit DegeneratePairError(const std::string& msg) : Error(msg) {}
};

} // namespace wellrec

#endif
