"""Machine-readable cases: loading, listing, serialization and verification."""
from .model import Flag, GroupCase, case_from_dict, case_schema, case_to_dict, dumps_case
from .store import ENV_VAR, CaseSummary, case_ids, catalog_dir, list_cases, load_case, load_file

__all__ = ["Flag", "GroupCase", "case_from_dict", "case_schema", "case_to_dict", "dumps_case", "ENV_VAR",
           "CaseSummary", "case_ids", "catalog_dir", "list_cases", "load_case", "load_file"]
