#pragma once

// Episodic replay memory. Whole episodes are stored so that sampled
// training windows are contiguous histories that never cross an episode
// boundary.

#include <Eigen/Core>
#include <cstddef>
#include <deque>
#include <vector>

#include "cavoid/random.hpp"

namespace cavoid {

struct Experience {
  Eigen::VectorXd observation;       ///< encoded network input
  int action = 0;
  double reward = 0.0;
  Eigen::VectorXd next_observation;  ///< encoded network input
  bool terminal = false;
};

using Episode = std::vector<Experience>;

/// Contiguous slice of one stored episode, oldest first. The training
/// target belongs to the last transition.
struct SequenceSample {
  std::size_t episode = 0;  ///< index into the buffer at sampling time
  std::size_t end = 0;      ///< index of the last transition in the episode
  std::vector<Experience> transitions;
};

class ReplayBuffer {
 public:
  /// capacity counts transitions.
  explicit ReplayBuffer(std::size_t capacity);

  /// Appends an episode and evicts whole oldest episodes until the total
  /// fits. An episode longer than the capacity keeps only its last
  /// `capacity` transitions.
  void store_episode(Episode episode);

  /// batch_size windows of at most seq_len transitions: a stored episode
  /// is chosen uniformly, then an end position uniformly within it.
  /// Throws BufferNotReadyError when empty.
  std::vector<SequenceSample> sample_sequences(int batch_size, int seq_len, Rng& rng) const;

  std::size_t size() const { return transitions_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t episode_count() const { return episodes_.size(); }
  const std::deque<Episode>& episodes() const { return episodes_; }

 private:
  std::size_t capacity_;
  std::size_t transitions_ = 0;
  std::deque<Episode> episodes_;
};

}  // namespace cavoid
