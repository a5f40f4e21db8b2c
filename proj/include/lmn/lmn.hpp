#pragma once

#include "lmn/abac.hpp"
#include "lmn/eval/benchmark.hpp"
#include "lmn/eval/bertscore.hpp"
#include "lmn/eval/extraction.hpp"
#include "lmn/eval/metrics.hpp"
#include "lmn/llm_client.hpp"
#include "lmn/mesp.hpp"
#include "lmn/mock_backend.hpp"
#include "lmn/openai_backend.hpp"
#include "lmn/pipeline.hpp"
#include "lmn/prompts.hpp"
#include "lmn/service.hpp"
#include "lmn/version.hpp"
#include "lmn/zip.hpp"
