#pragma once

#include "pipeline_config.hpp"

namespace glioseg::cli {

void cmd_fit_stats(const PipelineConfig& cfg);
void cmd_preprocess(const PipelineConfig& cfg);
void cmd_train_seg(const PipelineConfig& cfg);
void cmd_predict_seg(const PipelineConfig& cfg);
void cmd_eval_seg(const PipelineConfig& cfg);
void cmd_extract_features(const PipelineConfig& cfg);
void cmd_train_os(const PipelineConfig& cfg);
void cmd_predict_os(const PipelineConfig& cfg);
void cmd_eval_os(const PipelineConfig& cfg);

}  // namespace glioseg::cli
