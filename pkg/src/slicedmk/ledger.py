"""SQLite ledger of CLI runs, suite checks and errors."""

import json
import sqlite3
from collections.abc import Generator
from contextlib import contextmanager
from pathlib import Path
from typing import Any

from .suites import SuiteResult


class RunLedger:
    """Records every command invocation, the checks it ran and the errors it hit."""

    def __init__(self, db_path: str | Path = "slicedmk_runs.db"):
        """Open (and create if needed) the ledger.

        Args:
            db_path: Path to SQLite database file
        """
        self.db_path = Path(db_path)
        self._init_db()

    @contextmanager
    def _get_connection(self) -> Generator[sqlite3.Connection, None, None]:
        """Context manager for database connections.

        Yields:
            SQLite connection with row factory enabled
        """
        conn = sqlite3.connect(self.db_path)
        conn.row_factory = sqlite3.Row
        try:
            yield conn
            conn.commit()
        except Exception:
            conn.rollback()
            raise
        finally:
            conn.close()

    def _init_db(self) -> None:
        with self._get_connection() as conn:
            cursor = conn.cursor()

            cursor.execute("""
                CREATE TABLE IF NOT EXISTS runs (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    command TEXT NOT NULL,
                    parameters TEXT NOT NULL,
                    seed INTEGER,
                    started_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP,
                    finished_at TIMESTAMP,
                    exit_code INTEGER,
                    manifest_path TEXT
                )
            """)

            # One row per check of a verification suite
            cursor.execute("""
                CREATE TABLE IF NOT EXISTS checks (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    run_id INTEGER NOT NULL REFERENCES runs(id),
                    suite TEXT NOT NULL,
                    check_name TEXT NOT NULL,
                    value REAL,
                    threshold TEXT,
                    passed BOOLEAN NOT NULL
                )
            """)

            cursor.execute("""
                CREATE TABLE IF NOT EXISTS error_log (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    timestamp TIMESTAMP DEFAULT CURRENT_TIMESTAMP,
                    error_type TEXT NOT NULL,
                    error_message TEXT NOT NULL,
                    command TEXT,
                    run_id INTEGER
                )
            """)

            cursor.execute("""
                CREATE INDEX IF NOT EXISTS idx_checks_run
                ON checks(run_id)
            """)

    def start_run(self, command: str, parameters: dict[str, Any], seed: int | None) -> int:
        """Insert a run row and return its id.

        Args:
            command: Subcommand name (e.g. 'verify')
            parameters: Parsed arguments, stored as sorted JSON
            seed: Base seed of the run
        """
        with self._get_connection() as conn:
            cursor = conn.cursor()
            cursor.execute(
                "INSERT INTO runs (command, parameters, seed) VALUES (?, ?, ?)",
                (command, json.dumps(parameters, sort_keys=True, default=str), seed),
            )
            return int(cursor.lastrowid)

    def finish_run(self, run_id: int, exit_code: int, manifest_path: str | None = None) -> None:
        with self._get_connection() as conn:
            conn.execute(
                """
                UPDATE runs SET finished_at = CURRENT_TIMESTAMP, exit_code = ?, manifest_path = ?
                WHERE id = ?
            """,
                (exit_code, manifest_path, run_id),
            )

    def record_checks(self, run_id: int, result: SuiteResult) -> None:
        """Store every row of a suite result under a run."""
        with self._get_connection() as conn:
            conn.executemany(
                """
                INSERT INTO checks (run_id, suite, check_name, value, threshold, passed)
                VALUES (?, ?, ?, ?, ?, ?)
            """,
                [
                    (run_id, result.name, row.check, float(row.value), row.threshold, row.passed)
                    for row in result.rows
                ],
            )

    def log_error(
        self,
        error_type: str,
        error_message: str,
        command: str | None = None,
        run_id: int | None = None,
    ) -> None:
        """Log an error.

        Args:
            error_type: Exception class name (e.g., 'TooLargeError')
            error_message: Detailed error message
            command: Subcommand that failed
            run_id: Run the error belongs to
        """
        with self._get_connection() as conn:
            conn.execute(
                """
                INSERT INTO error_log (error_type, error_message, command, run_id)
                VALUES (?, ?, ?, ?)
            """,
                (error_type, error_message, command, run_id),
            )

    def get_recent_runs(self, limit: int = 20) -> list[dict[str, Any]]:
        with self._get_connection() as conn:
            cursor = conn.cursor()
            cursor.execute("SELECT * FROM runs ORDER BY id DESC LIMIT ?", (limit,))
            return [dict(row) for row in cursor.fetchall()]

    def get_checks(self, run_id: int) -> list[dict[str, Any]]:
        with self._get_connection() as conn:
            cursor = conn.cursor()
            cursor.execute("SELECT * FROM checks WHERE run_id = ? ORDER BY id", (run_id,))
            return [dict(row) for row in cursor.fetchall()]

    def get_recent_errors(self, limit: int = 5) -> list[dict[str, Any]]:
        """Get most recent errors.

        Args:
            limit: Number of recent errors to return

        Returns:
            List of recent error records
        """
        with self._get_connection() as conn:
            cursor = conn.cursor()
            cursor.execute(
                "SELECT * FROM error_log ORDER BY timestamp DESC, id DESC LIMIT ?", (limit,)
            )
            return [dict(row) for row in cursor.fetchall()]
