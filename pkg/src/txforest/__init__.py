"""Transactional filestores: specifications, zipper navigation,
consistency checking and optimistic transactions."""

from .consistency import ConsistencyResult, consistent, cover, cover_set, pconsistent
from .engine import GlobalContext, eval_expr, exec_cmd, exec_nav, exec_update, run_program
from .errors import Undefined
from .fsmodel import (
    Dir, File, FileStore, Path, Read, WriteDir, WriteFile,
    add_node, close, is_well_formed, make_dir, make_file,
)
from .surface import SurfaceError, compile_text, load_spec, parse, parse_command, parse_expr
from .txn import Err, Ok, OpError, RetryExhausted, Store, TxError, loop_txn, run_txn
from .zipper import LocalContext, Zipper, goto_root, mk_root

__version__ = "0.1.0"

__all__ = [
    "ConsistencyResult", "consistent", "cover", "cover_set", "pconsistent",
    "GlobalContext", "eval_expr", "exec_cmd", "exec_nav", "exec_update", "run_program",
    "Undefined",
    "Dir", "File", "FileStore", "Path", "Read", "WriteDir", "WriteFile",
    "add_node", "close", "is_well_formed", "make_dir", "make_file",
    "SurfaceError", "compile_text", "load_spec", "parse", "parse_command", "parse_expr",
    "Err", "Ok", "OpError", "RetryExhausted", "Store", "TxError", "loop_txn", "run_txn",
    "LocalContext", "Zipper", "goto_root", "mk_root",
]
