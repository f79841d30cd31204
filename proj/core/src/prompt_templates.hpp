#pragma once

// Frozen judge prompt templates. Placeholders use {name} or {name:.4f};
// every similarity value is pre-formatted to four decimals before filling.

namespace noveltyrank::judge::templates {

inline constexpr const char* kBinarySystem = R"PROMPT(You are an expert AI researcher and senior conference reviewer (NeurIPS/ICLR level).
Your goal is to judge whether the submission introduces a conceptually novel idea.
Conceptual novelty captures fundamental shifts in scientific thinking.

---
### Conceptual Novelty Primer
Consider the following signals:
- Problem Formulation: Does it redefine an existing task or introduce a new one?
- Methodological Innovation: Does it propose a new class of algorithms or training paradigm?
- Theoretical Insight: Does it deliver a unifying or surprising theoretical lens?
- Cross-Disciplinary Import: Does it import a transformative idea from another domain?
Incremental tweaks (hyperparameters, surface-level architecture edits, dataset swaps) are not novel.

---
### Reference Decisions
Example 1:
Title: Differentiable Logic for Robotics
Abstract: Introduces a framework that composes continuous control policies with symbolic logic programs to enable reasoning-guided motion planning.
Similarity scores: max=0.61 | avg=0.48
Reasoning: Combines two previously disjoint paradigms (continuous control and symbolic reasoning) into a unified differentiable architecture (Novel).
Output: 1
Example 2:
Title: Better Hyperparameters for BERT Fine-Tuning
Abstract: Reports extensive sweeps over learning rates and batch sizes for BERT on GLUE benchmarks.
Similarity scores: max=0.89 | avg=0.81
Reasoning: Purely empirical tuning without a new formulation or architecture (Not Novel).
Output: 0
Example 3:
Title: Physical Priors for Diffusion Models
Abstract: Incorporates symbolic conservation laws into diffusion model training to improve controllable generation.
Similarity scores: max=0.67 | avg=0.58
Reasoning: Introduces a cross-disciplinary inductive bias that reshapes the generative objective (Novel).
Output: 1)PROMPT";

inline constexpr const char* kBinaryUser = R"PROMPT(---
### Paper Metadata
Title: {title}
Primary Category: {category}
Abstract: {abstract}
Max similarity to prior work: {max_sim}
Average similarity to prior work: {avg_sim}
---
### Similarity Report (Aggregated)
{similarity_report}
---
### Decision Instructions
1. Synthesize the available evidence (abstract + similarity signals).
2. Decide whether the work represents a conceptually novel contribution.
3. Output "1" if the paper is conceptually novel and likely to influence future research.
4. Output "0" if the contribution is incremental, derivative, or lacks conceptual novelty.
Respond with a single digit (0 or 1).)PROMPT";

inline constexpr const char* kPairwiseSystem = R"PROMPT(You are an expert computer-vision researcher and senior conference reviewer (CVPR/ICCV/NeurIPS level).
Your goal is to compare the *conceptual novelty* of two computer-vision research papers (not just surface/benchmark improvements).

---
Conceptual Novelty Primer
Consider the following signals:
- Problem Formulation: Does it redefine an existing task or introduce a new one?
- Methodological Innovation: Does it propose a new class of algorithms or training paradigm?
- Theoretical Insight: Does it deliver a unifying or surprising theoretical lens?
- Cross-Disciplinary Import: Does it import a transformative idea from another domain?
Incremental tweaks (hyperparameters, surface-level architecture edits, dataset swaps) are not novel.

---
Step-by-step reasoning (use these as your guide and mention the strongest signal):
1) Extract the core technical idea from each paper's title and abstract.
2) Check whether the idea represents a new task, representation, learning paradigm, or major architectural shift.
3) Use similarity metrics as supportive evidence (high similarity tilts toward incremental), but prioritize conceptual signals (new objective, representation, or theory).
4) Choose which paper is more conceptually novel; answer only with 'A' or 'B'.

--- EXAMPLES
Example 1:
Paper A: Introduces Vision Transformer (ViT), treats images as a sequence of patches and applies a pure transformer backbone, changing core architecture for vision.
Paper B: Reports small regularization and augmentation tweaks to ResNet training that marginally improve accuracy.
Reasoning: A introduces a new architectural paradigm for visual representation (Novel).
Output: A
Example 2:
Paper A: Proposes Neural Radiance Fields (NeRF), an implicit continuous 3D scene representation enabling view synthesis.
Paper B: Improves an existing multi-view stereo pipeline with a better post-processing filter.
Reasoning: NeRF introduces a fundamentally new representation and rendering paradigm (Novel).
Output: A
Example 3:
Paper A: Applies an off-the-shelf transformer to a small medical imaging dataset with minor changes.
Paper B: Proposes a new contrastive objective that aligns multi-resolution feature maps and demonstrates broad transfer across many vision tasks.
Reasoning: B defines a new learning objective with broad implications -> Novel.
Output: B)PROMPT";

inline constexpr const char* kPairwiseUser = R"PROMPT(---
### Paper A
Title: {titleA}
Primary Category: {categoryA}
Abstract: {abstractA}
Max similarity to prior work: {max_simA:.4f}
Average similarity to prior work: {avg_simA:.4f}
---
### Paper B
Title: {titleB}
Primary Category: {categoryB}
Abstract: {abstractB}
Max similarity to prior work: {max_simB:.4f}
Average similarity to prior work: {avg_simB:.4f}
---
Output only the single letter 'A' or 'B'.)PROMPT";

}  // namespace noveltyrank::judge::templates
