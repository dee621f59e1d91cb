from datetime import datetime, timezone
from sqlalchemy import create_engine, Column, Integer, String, Float, DateTime
from sqlalchemy.orm import declarative_base, sessionmaker
from pepbcd.config import settings

Base = declarative_base()


def get_utc_now():
    """
    Current UTC time as a naive datetime (SQLite stores no timezone).
    """
    return datetime.now(timezone.utc).replace(tzinfo=None)


class BoundRecord(Base):
    __tablename__ = 'bound_records'

    id = Column(Integer, primary_key=True)
    timestamp = Column(DateTime, default=get_utc_now)

    # Which command produced the bound
    command = Column(String(30))
    method = Column(String(120))
    kind = Column(String(20))

    # Problem description
    p = Column(Integer)
    K = Column(Integer, nullable=True)
    N = Column(Integer)
    L = Column(String(100))
    gamma = Column(String(100), nullable=True)
    setting = Column(String(20))
    radius = Column(Float)
    criterion = Column(String(20))

    # Result
    value = Column(Float, nullable=True)
    safe_bound = Column(Float, nullable=True)
    solver_status = Column(String(20))
    solver_tol = Column(Float)
    solve_seconds = Column(Float, default=0.0)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "timestamp": self.timestamp.isoformat() if self.timestamp else None,
            "command": self.command,
            "method": self.method,
            "kind": self.kind,
            "p": self.p,
            "K": self.K,
            "N": self.N,
            "L": self.L,
            "gamma": self.gamma,
            "setting": self.setting,
            "radius": self.radius,
            "criterion": self.criterion,
            "value": self.value,
            "safe_bound": self.safe_bound,
            "solver_status": self.solver_status,
            "solver_tol": self.solver_tol,
            "solve_seconds": self.solve_seconds,
        }


engine = create_engine(settings.DB_URL)
SessionLocal = sessionmaker(bind=engine)


def init_db():
    Base.metadata.create_all(bind=engine)


def _finite(value):
    return value if value is not None and value == value and abs(value) != float("inf") else None


def record_report(db, report, command: str) -> BoundRecord:
    """Append one BoundReport to the ledger (caller commits)."""
    row = report.to_row()
    record = BoundRecord(
        command=command,
        method=report.method,
        kind=report.kind,
        p=report.p,
        K=report.K,
        N=report.N,
        L=row["L"],
        gamma=row["gamma"] or None,
        setting=report.setting,
        radius=report.radius,
        criterion=report.criterion,
        value=_finite(report.value),
        safe_bound=_finite(report.safe_bound),
        solver_status=report.status,
        solver_tol=report.solver_tol,
        solve_seconds=report.solve_seconds,
    )
    db.add(record)
    return record
