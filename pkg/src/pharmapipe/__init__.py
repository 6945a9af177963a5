"""pharmapipe: ICU pharmacy LLM pipeline toolkit.

Patient clustering over text embeddings, dynamic few-shot prompting,
iterative prompt optimization, and evaluation harnesses for mortality,
APACHE II range, and 24-hour medication-plan tasks — runnable fully offline
against a deterministic mock backend or live against any chat-completions
compatible endpoint.
"""

__version__ = "0.1.0"
