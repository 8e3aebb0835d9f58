"""Independent capped-boundary MGF oracle, written directly from the boundary
dynamics with numpy/scipy. Values printed here are frozen into
tests/test_ctmc_oracle.cpp.

    python3 tests/oracles/capped_mgf.py
"""
import numpy as np, scipy.sparse as sp, scipy.sparse.linalg as sla

p1, p2, q1, rho = 0.1, 0.1, 5, 0.1
def trans(m,mask,M):
    out=[]
    c=[(mask>>i)&1 for i in range(m)]  # c[i] site i+1, 1=blue
    def enc(cs): return (len(cs), sum(b<<i for i,b in enumerate(cs)))
    pr=[None,p1,p2]
    for i in range(m):
        for d in (1,2):
            j=i+d
            if j<m and c[i]!=c[j]:
                cs=c[:]; cs[i],cs[j]=cs[j],cs[i]; out.append((pr[d],enc(cs)))
    def reveals(k):
        res=[]
        for bits in range(1<<k):
            w=1.0
            for t in range(k): w*= rho if (bits>>t)&1 else 1-rho
            res.append((w,[(bits>>t)&1 for t in range(k)]))
        return res
    if m+1<=M:
        for w,r in reveals(1):
            cs=c+r
            a=cs[:]; a[m-1],a[m]=a[m],a[m-1]; out.append((p1*w,enc(a)))
            if m>=2:
                a=cs[:]; a[m-2],a[m]=a[m],a[m-2]; out.append((p2*w,enc(a)))
            else:
                out.append((p2*w,enc(cs)))
    if m+2<=M:
        for w,r in reveals(2):
            cs=c+r; a=cs[:]; a[m-1],a[m+1]=a[m+1],a[m-1]; out.append((p2*w,enc(a)))
    if c[0]==1:
        cs=c[:]; cs[0]=0; out.append((p2,enc(cs)))
    else:
        out.append((q1,enc(c[1:]) if m>1 else (0,0)))
    return [(r,s) for r,s in out if r>0 and s!=(m,mask)]
def mgf(M,s):
    states=[(m,k) for m in range(1,M+1) for k in range(1<<m)]
    idx={st:i for i,st in enumerate(states)}
    n=len(states); rows=[];cols=[];vals=[]; rhs=np.zeros(n)
    for st in states:
        i=idx[st]; tot=0
        for r,t in trans(*st,M):
            tot+=r
            if t==(0,0): rhs[i]-=r
            else: rows.append(i);cols.append(idx[t]);vals.append(r)
        rows.append(i);cols.append(i);vals.append(-tot+s)
    A=sp.csc_matrix((vals,(rows,cols)),shape=(n,n))
    u=sla.spsolve(A,rhs)
    return rho*u[idx[(1,1)]]+(1-rho)*u[idx[(1,0)]], u
Mtb=lambda b:p2*q1/((p2-b)*(q1-b)); Mtp=lambda b:q1/(q1-b)
def g(b):
    mu=rho*Mtb(b)+(1-rho)*Mtp(b); return b-(p1+p2)*(mu-1)-p2*(mu*mu-1)
b=-0.05; s=g(b); print("s", repr(s), "closed", repr(rho*Mtb(b)+(1-rho)*Mtp(b)))
for M in [2,4,6,8,10,12]:
    v,u=mgf(M,s); print(M, repr(float(v)))
