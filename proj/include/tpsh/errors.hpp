#pragma once

#include <stdexcept>
#include <string>

namespace tpsh {

// Base class for all library errors. Subclasses map 1:1 onto the failure
// modes reported by the individual operations.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class UndersampledGrid : public Error {
public:
  using Error::Error;
};

class TruncatedState : public Error {
public:
  using Error::Error;
};

class InfiniteWidth : public Error {
public:
  using Error::Error;
};

class DecompositionFailure : public Error {
public:
  using Error::Error;
};

class ZeroIntensity : public Error {
public:
  using Error::Error;
};

class CorrelationTooFine : public Error {
public:
  using Error::Error;
};

class GridMismatch : public Error {
public:
  using Error::Error;
};

class EmptyRegion : public Error {
public:
  using Error::Error;
};

class ZeroMean : public Error {
public:
  using Error::Error;
};

class ProbeFailure : public Error {
public:
  using Error::Error;
};

class BasisSizeMismatch : public Error {
public:
  using Error::Error;
};

class TargetOutOfRange : public Error {
public:
  using Error::Error;
};

class EmptyTargets : public Error {
public:
  using Error::Error;
};

class RegionOutOfRange : public Error {
public:
  using Error::Error;
};

class DegenerateBackground : public Error {
public:
  using Error::Error;
};

class InvalidDetectorParams : public Error {
public:
  using Error::Error;
};

class TooFewFrames : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

class FormatError : public Error {
public:
  using Error::Error;
};

}  // namespace tpsh
