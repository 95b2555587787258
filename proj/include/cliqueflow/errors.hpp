#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cliqueflow {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BandwidthViolation : Error {
  BandwidthViolation(std::uint32_t node, std::size_t count)
      : Error("bandwidth violation at node " + std::to_string(node) + " (" + std::to_string(count) + ")"),
        node(node), count(count) {}
  std::uint32_t node;
  std::size_t count;
};

struct PayloadOverflow : Error {
  PayloadOverflow(std::uint32_t node, std::size_t words)
      : Error("payload of " + std::to_string(words) + " words from node " + std::to_string(node)),
        node(node), words(words) {}
  std::uint32_t node;
  std::size_t words;
};

enum class RouteRole { source, destination };

struct RoutingPreconditionViolation : Error {
  RoutingPreconditionViolation(std::uint32_t node, RouteRole role, std::size_t count)
      : Error("routing precondition violated: node " + std::to_string(node) +
              (role == RouteRole::source ? " sources " : " receives ") + std::to_string(count) + " messages"),
        node(node), role(role), count(count) {}
  std::uint32_t node;
  RouteRole role;
  std::size_t count;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct TooLarge : Error {
  using Error::Error;
};

struct EmptyGraph : Error {
  using Error::Error;
};

struct NoConvergence : Error {
  using Error::Error;
};

struct DisconnectedWithInfeasibleB : Error {
  using Error::Error;
};

struct CannotCertify : Error {
  using Error::Error;
};

struct RangeMismatch : Error {
  using Error::Error;
};

struct OddDegree : Error {
  explicit OddDegree(std::uint32_t v) : Error("vertex " + std::to_string(v) + " has odd degree"), vertex(v) {}
  std::uint32_t vertex;
};

struct NotMultipleOfDelta : Error {
  explicit NotMultipleOfDelta(std::uint32_t e)
      : Error("flow on arc " + std::to_string(e) + " is not a multiple of delta"), arc(e) {}
  std::uint32_t arc;
};

struct OddDegreeInternal : Error {
  using Error::Error;
};

struct Infeasible : Error {
  using Error::Error;
};

struct InteriorViolated : Error {
  using Error::Error;
};

struct SolverFailure : Error {
  using Error::Error;
};

struct NonHalfIntegralT : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

struct ValidationError : Error {
  using Error::Error;
};

}  // namespace cliqueflow
