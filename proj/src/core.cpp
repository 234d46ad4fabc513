#include "abstain/core.hpp"

namespace abstain {

ErrorTally tally_update(const ErrorTally& tally, const StreamEvent& event,
                        Prediction prediction, RunMode mode) {
  ErrorTally out = tally;
  if (prediction == Prediction::Abstain && event.origin == Origin::Iid) {
    ++out.abstain_on_iid;
  }
  if (mode == RunMode::Realizable) {
    if (is_committed(prediction) && !agrees(prediction, event.observed_label)) {
      ++out.mis_realizable;
    }
  } else {
    const int learner_miss =
        (is_committed(prediction) && !agrees(prediction, event.observed_label))
            ? 1
            : 0;
    const int target_miss = (event.clean_label != event.observed_label) ? 1 : 0;
    out.mis_agnostic += learner_miss - target_miss;
  }
  return out;
}

}  // namespace abstain
