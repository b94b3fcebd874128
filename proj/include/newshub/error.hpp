#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace newshub {

enum class Errc {
  input,
  parse,
  transport,
  upstream,
  config,
  empty_input,
  empty_corpus,
  unparseable_verdict,
  conflict,
  integrity,
  undefined_kappa,
  export_blocked,
  gate_failed,
  training,
  degenerate_learner,
  validation,
  not_found,
  io,
};

const char* to_string(Errc code) noexcept;

// Base error for every failure the library reports. The code is stable and
// is what the service layer maps onto HTTP statuses.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

  // Transport failures are the only class a caller may blindly retry.
  bool retriable() const noexcept { return code_ == Errc::transport; }

 private:
  Errc code_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t byte_offset, const std::string& what)
      : Error(Errc::parse, what + " (at byte " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

class UpstreamError : public Error {
 public:
  UpstreamError(int status, const std::string& what)
      : Error(Errc::upstream, what + " (HTTP " + std::to_string(status) + ")"),
        status_(status) {}

  int status() const noexcept { return status_; }

 private:
  int status_;
};

// An error that carries the ids it is about (blocked export, unknown
// prediction ids, ...).
class IdListError : public Error {
 public:
  IdListError(Errc code, const std::string& what, std::vector<std::string> ids);

  const std::vector<std::string>& ids() const noexcept { return ids_; }

 private:
  std::vector<std::string> ids_;
};

}  // namespace newshub
