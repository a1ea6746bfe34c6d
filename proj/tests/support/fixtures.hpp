#pragma once

#include <chrono>
#include <stdexcept>
#include <string>

#include "afft/descriptor.hpp"
#include "afft/synthgen.hpp"
#include "afft/tensor.hpp"

namespace afft::testing {

struct Trained {
  TrainingFixture fixture;
  InteractionExample example;
  InteractionTensor tensor;
  AffordanceDescriptor descriptor;
};

inline Trained train_fixture(const std::string& name, SamplingMethod method = SamplingMethod::WeightDriven,
                             std::uint64_t seed = 0) {
  auto fx = find_training_fixture(name);
  if (!fx) throw std::runtime_error("no fixture " + name);
  Trained t{*fx, build_training_example(*fx), {}, {}};
  t.tensor = compute_tensor(t.example, 0.0, seed);
  DescriptorOptions o;
  o.method = method;
  o.n_aff = fx->n_aff;
  o.s_aff = fx->s_aff;
  o.seed = seed;
  o.query_object_ref = "preset:" + name;
  t.descriptor = sample_descriptor(t.tensor, t.example, o);
  return t;
}

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

 private:
  using Clock = std::chrono::steady_clock;
  Clock::time_point start_ = Clock::now();
};

}  // namespace afft::testing
