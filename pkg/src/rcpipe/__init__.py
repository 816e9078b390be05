"""Pipeline tooling for generative reading comprehension.

Covers dataset ingestion, the source/target sequence codec with style
tokens and ranking segments, mixed-style corpus construction, answer
quality metrics, NLI-based factuality evaluation, and a batch client
for an external generation service.
"""

__version__ = "0.1.0"
