#pragma once

#include <stdexcept>
#include <string>

namespace ocrpost {

// Malformed input data: bad UTF-8, bad n-gram line, bad model file.
class parse_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Missing or invalid configuration: absent lexicon file, invalid probability.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// API contract violation: wrong gram arity, fold count exceeding error count.
class usage_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Training data that cannot produce a model, e.g. a missing label class.
class training_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ocrpost
