#pragma once

#include <stdexcept>
#include <string>

namespace fbdiss {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownModel : public Error { public: using Error::Error; };
class SizeTooSmall : public Error { public: using Error::Error; };
class InvalidParam : public Error { public: using Error::Error; };
class NotBilayer : public Error { public: using Error::Error; };
class NumericalFailure : public Error { public: using Error::Error; };
class NoExactCls : public Error { public: using Error::Error; };
class AmbiguousBands : public Error { public: using Error::Error; };
class UnknownChainStructure : public Error { public: using Error::Error; };
class IndexOutOfRange : public Error { public: using Error::Error; };
class DimensionMismatch : public Error { public: using Error::Error; };
class DimensionTooLarge : public Error { public: using Error::Error; };
class NoZeroEigenvalue : public Error { public: using Error::Error; };
class NotConverged : public Error { public: using Error::Error; };
class NotPure : public Error { public: using Error::Error; };
class BadCount : public Error { public: using Error::Error; };
class BadWindow : public Error { public: using Error::Error; };
class BadCsv : public Error { public: using Error::Error; };
class ConfigParse : public Error { public: using Error::Error; };

}  // namespace fbdiss
