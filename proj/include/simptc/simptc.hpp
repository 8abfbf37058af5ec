#pragma once

#include "simptc/ablation.hpp"
#include "simptc/anchors.hpp"
#include "simptc/bgmm.hpp"
#include "simptc/config.hpp"
#include "simptc/error.hpp"
#include "simptc/expansion.hpp"
#include "simptc/fixture.hpp"
#include "simptc/gmm.hpp"
#include "simptc/io.hpp"
#include "simptc/kmeans.hpp"
#include "simptc/linalg.hpp"
#include "simptc/metrics.hpp"
#include "simptc/model_io.hpp"
#include "simptc/pca.hpp"
#include "simptc/pipeline.hpp"
#include "simptc/stats.hpp"
#include "simptc/synthetic.hpp"
#include "simptc/types.hpp"
#include "simptc/unbalance.hpp"
