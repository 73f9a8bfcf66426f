#ifndef RCP_ERRORS_HPP
#define RCP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rcp {

// Base class for all library exceptions.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class PolicyNonFinite : public Error {
public:
    explicit PolicyNonFinite(const std::string& msg) : Error(msg) {}
};

class NonFiniteIncrement : public Error {
public:
    explicit NonFiniteIncrement(const std::string& msg) : Error(msg) {}
};

class GridMisalignment : public Error {
public:
    explicit GridMisalignment(const std::string& msg) : Error(msg) {}
};

class PicardDivergence : public Error {
public:
    explicit PicardDivergence(const std::string& msg) : Error(msg) {}
};

class NonFiniteSurface : public Error {
public:
    explicit NonFiniteSurface(const std::string& msg) : Error(msg) {}
};

class OutOfDomain : public Error {
public:
    explicit OutOfDomain(const std::string& msg) : Error(msg) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

} // namespace rcp

#endif
