#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace prefrank {

/// Dense 0-based item index into an ItemPool.
using ItemId = std::size_t;

/// Unordered pair stored with first < second.
struct Pair {
    ItemId first = 0;
    ItemId second = 0;

    friend bool operator==(const Pair&, const Pair&) = default;
    friend auto operator<=>(const Pair&, const Pair&) = default;
};

inline Pair make_pair_sorted(ItemId a, ItemId b) {
    return a < b ? Pair{a, b} : Pair{b, a};
}

// Error hierarchy. Every error carries a stable machine-readable code so the
// service layer can map it onto a response without string matching.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line)
        : Error("parse_error", message + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message) : Error("validation_error", message) {}
};

class InvalidPairError : public Error {
public:
    explicit InvalidPairError(const std::string& message) : Error("invalid_pair", message) {}
};

class RankDeficientError : public Error {
public:
    RankDeficientError(std::size_t deficient, std::size_t dim)
        : Error("rank_deficient", "information matrix is rank deficient: " + std::to_string(deficient) +
                                      " of " + std::to_string(dim) + " directions unidentified"),
          deficient_(deficient) {}
    std::size_t deficient_dimensions() const noexcept { return deficient_; }

private:
    std::size_t deficient_;
};

class FactorizationError : public Error {
public:
    explicit FactorizationError(const std::string& message) : Error("factorization_error", message) {}
};

/// No eligible pair remains to be queried.
class ExhaustedError : public Error {
public:
    explicit ExhaustedError(const std::string& message) : Error("exhausted", message) {}
};

class TieError : public Error {
public:
    explicit TieError(const std::string& message) : Error("tie", message) {}
};

class ConflictError : public Error {
public:
    explicit ConflictError(const std::string& message) : Error("conflict", message) {}
};

class NotFoundError : public Error {
public:
    explicit NotFoundError(const std::string& message) : Error("not_found", message) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("config_error", message) {}
};

class AlignmentError : public Error {
public:
    explicit AlignmentError(const std::string& message) : Error("alignment_error", message) {}
};

}  // namespace prefrank
