"""``python -m hapticsim``."""

from .cli import main

raise SystemExit(main())
