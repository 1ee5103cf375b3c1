"""
Driving the command-line interface
==================================

Every computation is also reachable from ``neumann-sharp``. Here the entry
point is called in-process; the same arguments work from a shell.
"""

from neumann_sharp.cli import main

# a single Neumann eigenvalue, printed to stdout
main(["compute", "mu", "--shape", "square", "--p", "2", "--q", "2", "--h", "0.1"])

# the constant pi_p and a ball eigenvalue
main(["compute", "pip", "--p", "3"])
main(["compute", "ball", "--p", "2", "--dim", "2", "--radius", "1"])

# an inequality check; the return value is the process exit code
code = main(["verify", "main", "--shape", "rhombus", "--d", "2", "--k", "4", "--p", "2"])
print("exit code:", code)

# a small sweep written as CSV
main(["sweep", "collapse", "--p", "2", "--q", "3", "--widths", "0.2,0.1"])
