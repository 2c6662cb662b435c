#include "cavoid/replay.hpp"

#include <algorithm>

#include "cavoid/errors.hpp"

namespace cavoid {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay capacity must be positive");
}

void ReplayBuffer::store_episode(Episode episode) {
  if (episode.empty()) return;
  if (episode.size() > capacity_) {
    episode.erase(episode.begin(), episode.end() - static_cast<std::ptrdiff_t>(capacity_));
  }
  transitions_ += episode.size();
  episodes_.push_back(std::move(episode));
  while (transitions_ > capacity_) {
    transitions_ -= episodes_.front().size();
    episodes_.pop_front();
  }
}

std::vector<SequenceSample> ReplayBuffer::sample_sequences(int batch_size, int seq_len, Rng& rng) const {
  if (episodes_.empty()) throw BufferNotReadyError("replay buffer is empty");
  if (batch_size < 1 || seq_len < 1) throw ConfigError("batch_size and seq_len must be positive");

  std::uniform_int_distribution<std::size_t> pick_episode(0, episodes_.size() - 1);
  std::vector<SequenceSample> out;
  out.reserve(static_cast<std::size_t>(batch_size));
  for (int b = 0; b < batch_size; ++b) {
    SequenceSample s;
    s.episode = pick_episode(rng);
    const Episode& ep = episodes_[s.episode];
    s.end = std::uniform_int_distribution<std::size_t>(0, ep.size() - 1)(rng);
    const std::size_t begin = s.end + 1 >= static_cast<std::size_t>(seq_len) ? s.end + 1 - static_cast<std::size_t>(seq_len) : 0;
    s.transitions.assign(ep.begin() + static_cast<std::ptrdiff_t>(begin),
                         ep.begin() + static_cast<std::ptrdiff_t>(s.end + 1));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace cavoid
