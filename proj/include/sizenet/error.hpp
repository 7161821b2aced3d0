#ifndef SIZENET_ERROR_HPP
#define SIZENET_ERROR_HPP

#include <stdexcept>
#include <string>

namespace sizenet {

// Raised for malformed inputs, bad configuration and contract violations
// detected at a module boundary. The CLI maps this to exit status 2;
// anything else escaping to main is an internal error (status 1).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sizenet

#endif
