#ifndef IRGAIL_ERRORS_H_
#define IRGAIL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace irgail {

// Training or simulation produced a non-finite value. Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A pipeline stage was asked to run before the stage it depends on.
// Maps to CLI exit code 2.
class MissingArtifactError : public std::runtime_error {
 public:
  MissingArtifactError(const std::string& artifact, const std::string& stage)
      : std::runtime_error("missing artifact '" + artifact +
                           "'; run the '" + stage + "' stage first"),
        stage_(stage) {}

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace irgail

#endif  // IRGAIL_ERRORS_H_
