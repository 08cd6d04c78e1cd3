"""Context-aware literature recommendations.

Document similarity here is a scored triple — seed document, target
document, and a named context — built from text features, citation
structure, curated annotations, and a pairwise classifier. The query
engine answers analogical queries ("similar method, different resource")
and produces diverse or focused recommendation sets.
"""

__version__ = "0.1.0"
