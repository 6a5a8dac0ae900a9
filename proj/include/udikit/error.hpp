#pragma once

#include <stdexcept>
#include <string>

namespace udikit {

// Base for every data/contract failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input file. The message names the byte or line offset.
class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace udikit
