"""Analytics pipeline for educational video design.

Workflow stages: collect metadata and engagement (ingest), measure video
features (extract), join everything into one table (dataset), explore it
(eda), fit a retention model (model), and turn the fit into ranked
influences, what-if scenarios and design feedback (insight). The cli and
service modules drive the same project-directory layout from the command
line and over HTTP.
"""

__version__ = "0.1.0"
