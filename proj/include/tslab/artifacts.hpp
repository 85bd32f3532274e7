#pragma once

#include <string>
#include <vector>

#include "tslab/dqn.hpp"
#include "tslab/evalkit.hpp"
#include "tslab/games.hpp"

namespace tslab {

// JSON-lines episode dump: one record per episode with the series and the
// drawn generation parameters.
void write_episode_dump(const std::vector<EpisodeData>& episodes, const std::string& path);
std::vector<EpisodeData> read_episode_dump(const std::string& path);

// JSON-lines training log, one record per episode.
void write_train_log(const std::vector<TrainLogRow>& log, const std::string& path);

void write_eval_report(const EvalReport& report, const std::string& path);
EvalReport read_eval_report(const std::string& path);

void write_comparison_json(const std::vector<ComparisonRow>& rows, const std::string& path);

}  // namespace tslab
