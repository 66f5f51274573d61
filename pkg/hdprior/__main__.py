# app
from ._cli import main


exit(main())
