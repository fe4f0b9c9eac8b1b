#pragma once

// Internal JSON (de)serialization of config structs, shared by the run-config
// file and checkpoint metadata.

#include "json_util.hpp"
#include "segforge/augment.hpp"
#include "segforge/dataset.hpp"
#include "segforge/loss.hpp"
#include "segforge/trainer.hpp"
#include "segforge/unet.hpp"

namespace segforge::jsonu {

json to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_from_json(const json& j);

json to_json(const AugmentConfig& cfg);
AugmentConfig augment_from_json(const json& j);

json to_json(const UNetConfig& cfg);
UNetConfig unet_from_json(const json& j);

json to_json(const LossConfig& cfg);
/// num_classes supplies the default class_weights length.
LossConfig loss_from_json(const json& j, int num_classes);

json to_json(const TrainConfig& cfg);
TrainConfig train_from_json(const json& j);

} // namespace segforge::jsonu
