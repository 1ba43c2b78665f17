#ifndef CONSTRUE_REASONING_HPP
#define CONSTRUE_REASONING_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "construe/interpretation.hpp"

namespace construe {

// A reasoning branch that was enumerated but failed its consistency checks;
// kept for explanation traces ("why-not").
struct Rejection {
  OpKind op = OpKind::Abduce;
  std::string description;
  std::string cause;
};

// Lazy one-at-a-time descendant generation for partial expansion. The plan of
// candidate branches is fixed at construction, in deterministic order:
//   observation focus: DEDUCE (per Alg. 4 direction), ABDUCE (grammar then
//                      production order), ADVANCE;
//   finding focus:     SUBSUME (candidates in sequence order), PREDICT
//                      (grammar order; detector proposals in time order).
// next() materializes candidates until one is consistent, recording the
// rejected ones.
class DescendantCursor {
 public:
  explicit DescendantCursor(std::shared_ptr<const Interpretation> parent);

  std::optional<Interpretation> next(std::vector<Rejection>* rejections);

  bool exhausted() const { return pos_ >= candidates_.size(); }

 private:
  struct Candidate {
    enum class Kind {
      DeduceBack,
      DeduceForward,
      Abduce,
      Advance,
      Subsume,
      Predict,
      PredictDetected,
    };
    Kind kind;
    std::size_t grammar = 0;
    std::size_t production = 0;
    std::size_t hyp = 0;
    FindingRef finding{};
    ObsRef obs{};
    Observation detected;  // for PredictDetected
  };

  void plan();

  std::shared_ptr<const Interpretation> parent_;
  std::vector<Candidate> candidates_;
  std::size_t pos_ = 0;
};

// Convenience wrappers mirroring the per-mode reasoning functions; each
// returns every consistent branch of that mode (used by unit tests).
std::vector<Interpretation> abduce(const Interpretation& I,
                                   std::vector<Rejection>* rej = nullptr);
std::vector<Interpretation> deduce(const Interpretation& I,
                                   std::vector<Rejection>* rej = nullptr);
std::vector<Interpretation> subsume(const Interpretation& I,
                                    std::vector<Rejection>* rej = nullptr);
std::vector<Interpretation> predict(const Interpretation& I,
                                    std::vector<Rejection>* rej = nullptr);
std::optional<Interpretation> advance(const Interpretation& I);
std::vector<Interpretation> get_descendants(const Interpretation& I);

}  // namespace construe

#endif
