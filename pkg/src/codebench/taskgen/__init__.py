"""Fine-tuning dataset generation: five classification tasks and pointers."""
from .generators import (ClassificationExample, DocstringItem, ExamplePair, MisuseBug,
                         docstring_item, gen_exception_type, gen_function_docstring,
                         gen_swapped_operand, gen_variable_misuse, gen_wrong_binop)
from .pipeline import GenerationReport, TaskError, generate, read_jsonl, write_jsonl
from .pointer import PointerExample, gen_pointer_example, mask_violations, prune_example
from .tables import (EXCEPTION_LABELS, HOLE, OPERATOR_TABLE, TASKS, exception_label,
                     labels_for)

__all__ = [
    "ClassificationExample", "DocstringItem", "ExamplePair", "MisuseBug", "docstring_item",
    "gen_exception_type", "gen_function_docstring", "gen_swapped_operand",
    "gen_variable_misuse", "gen_wrong_binop", "GenerationReport", "TaskError", "generate",
    "read_jsonl", "write_jsonl", "PointerExample", "gen_pointer_example", "mask_violations",
    "prune_example", "EXCEPTION_LABELS", "HOLE", "OPERATOR_TABLE", "TASKS",
    "exception_label", "labels_for",
]
