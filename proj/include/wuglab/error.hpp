#pragma once

#include <stdexcept>
#include <string>

namespace wuglab {

// Base for recoverable runtime failures (I/O, capacity, bad data files).
// Contract violations use std::invalid_argument instead.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Lexicon cannot satisfy a disjointness or instantiation demand.
class InsufficientLexiconError : public Error {
public:
    explicit InsufficientLexiconError(const std::string& what) : Error(what) {}
};

// Checkpoint or record file is unreadable, truncated, or malformed.
class CorruptFileError : public Error {
public:
    explicit CorruptFileError(const std::string& what) : Error(what) {}
};

// Checkpoint version tag does not match this build.
class VersionMismatchError : public Error {
public:
    explicit VersionMismatchError(const std::string& what) : Error(what) {}
};

// Training loss became non-finite.
class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& what) : Error(what) {}
};

}  // namespace wuglab
