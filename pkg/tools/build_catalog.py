"""Write src/lassocompat/data/scenarios.json.

Expected numbers are hand-derived closed forms typed in independently of
the oracle module; loading the catalog re-checks them against it.
"""
import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src" / "lassocompat" / "data" / "scenarios.json"
sc=[]
def add(id, kind, claim, design, beta0=None, lam=None, expected=None, **kw):
    d={"id":id,"kind":kind,"claim":claim,"design":design}
    if beta0 is not None: d["beta0"]=beta0
    if lam is not None: d["lambda"]=lam
    d["expected"]=expected or {}
    d.update(kw); sc.append(d)
TV=lambda r:{"family":"TwoVar","params":{"rho":r}}
add("p2-exact-case1","exact","two variables, both coefficients survive",TV(.5),[1,1],.1,
    {"case_id":"Case1","beta_star":[.8,.8],"prediction_error":.04,"penalized_error":.04,"bound_compat":.04})
add("p2-exact-case2","exact","two variables, second coefficient killed",TV(.5),[1,.1],.1,
    {"case_id":"Case2","beta_star":[.85,0],"prediction_error":.0175,"penalized_error":.0175,"projection_plus_lambda2":.0175})
add("p2-exact-case3","exact","two variables, everything killed",TV(.5),[.1,.1],.2,
    {"case_id":"Case3","beta_star":[0,0],"prediction_error":.01,"penalized_error":.01,"u3":.01})
add("p2-boundary-12","exact","boundary between the first two cases",TV(.5),[1,.2],.1,
    {"case_id":"Case1","prediction_error":.04,"penalized_error":.04})
add("p2-boundary-23","exact","boundary between the last two cases",TV(.5),[.6,.2],.5,
    {"case_id":"Case2","prediction_error":.28,"penalized_error":.28})
add("p2-compat","compat","compatibility of the first variable and of the pair",TV(.8),
    expected={"sets":[[[1],.36],[[1,2],.2]]})
PB={"family":"PairBlocks","params":{"rhos":[.5,.75]}}
add("pairblocks-exact","exact","block design, all coefficients above threshold",PB,[1,.8,1,.9],.05,
    {"prediction_error":.03,"penalized_error":.03,"bound_compat":.03})
add("pairblocks-u2-tight","exact","block design at the threshold: penalized error equals 2 lambda times the even-indexed l1 norm",
    PB,[.1,.1,.2,.2],.05,{"prediction_error":.03,"penalized_error":.03,"two_lambda_evens":.03})
add("pairblocks-compat","compat","block design compatibility on all variables and on the even ones",PB,
    expected={"sets":[[[1,2,3,4],1/3],[[2,4],2/(1/.75+1/(1-.5625))]],"lambda_min":.25,"kappa2_all":.25})
add("orthogonal-extension","exact","orthogonal inactive variables do not change the two-variable result",
    {"family":"PairBlocksPlusOrthogonal","params":{"rho":.5,"m0":2}},[1,1,0,0],.1,
    {"prediction_error":.04,"penalized_error":.04,"beta_star":[.8,.8,0,0]})
add("parentchild-c2-gap","exact","one child with C=2: bound 0.16 against exact 0.14",
    {"family":"ParentChildSingle","params":{"rho":.75,"C":2}},[1,.8,0],.1,
    {"beta_star":[.4,.2,.2],"penalized_error":.14,"bound_compat":.16,"gap_ratio":8/7,"gap":.01/.5})
add("parentchild-compat","compat","one child: compatibility equals varphi2 * tau2",
    {"family":"ParentChildSingle","params":{"rho":.6,"C":2}},expected={"sets":[[[1,2],.08]],"Gamma2_S0":25.0})
# many children: rho .6, Cs (1.5,2), lam .05
phi2=.4; Cs=[1.5,2]; lam=.05
tau=[1-c*c*phi2/2 for c in Cs]
pen=2*lam**2/phi2+lam**2*sum((c*c-1)/t for c,t in zip(Cs,tau))
G2=2/phi2+sum(c*c/t for c,t in zip(Cs,tau))
add("parentchild-many","exact","several children: exact gap is lambda^2 times the l1 norm of 1/tau2",
    {"family":"ParentChildMany","params":{"rho":.6,"Cs":Cs}},[1,1,0,0],lam,
    {"penalized_error":pen,"bound_compat":lam**2*G2,"gap":lam**2*sum(1/t for t in tau)})
# block 2N: rhos (.5,.6), C 2, lam .05
ph=[.5,.4]; C=2; s0=4; t=1-C*C*sum(2*x for x in ph)/s0**2
pen=2*lam**2*sum(1/x for x in ph)+lam**2*(C*C-1)/t
add("parentchild-block2n","exact","child of two blocks",
    {"family":"ParentChildBlock2N","params":{"rhos":[.5,.6],"C":2}},[1,1,1,1,0],lam,
    {"penalized_error":pen,"bound_compat":lam**2*(2*sum(1/x for x in ph)+C*C/t),"gap":lam**2/t})
add("goodcomp-gap","exact","two children, compatibility positive",
    {"family":"GoodComp","params":{"rho":.6,"C":2,"tau2":.1}},[1,.8,0,0],.05,
    {"penalized_error":2*.0025/.4+.0025*3/.1,"bound_compat":.0025*45,"gap":.0025/.1,"phi2_S0":.04/.9})
add("goodcomp-unique","unique","two children with positive compatibility: unique minimiser",
    {"family":"GoodComp","params":{"rho":.6,"C":2,"tau2":.1}},[1,.8,0,0],.05,{"unique":True})
add("goodlasso2-slowrate","exact","compatibility zero but the Lasso still has a small error",
    {"family":"GoodLasso2","params":{"rho":.6,"C":2}},[1,.5,0,0],.1,
    {"beta_star":[.4375,0,.203125,.203125],"prediction_error":.015625,"penalized_error":.096875,
     "phi2_S0":0.0,"stated_prediction_error":.05,"stated_penalized_error":.1})
add("goodlasso3-nonunique","unique","compatibility zero and a segment of minimisers",
    {"family":"GoodLasso3","params":{"rho":.5}},[1,1,0,0],.1,
    {"unique":False,"prediction_error":.04,"phi2_S0":0.0,"beta3_interval":[0,.8]})
# blockgoodcomp
rh=[.6,.5]; Cs=[2,1.5]; ts=[.1,.2]; lam=.02
pen=sum(2*lam**2/(1-r)+lam**2*(c*c-1)/t for r,c,t in zip(rh,Cs,ts))
G2=sum(2/(1-r)+c*c/t for r,c,t in zip(rh,Cs,ts))
add("blockgoodcomp","exact","independent copies of the two-children design",
    {"family":"BlockGoodComp2N","params":{"rhos":rh,"Cs":Cs,"tau2s":ts}},[1,1,1,1,0,0,0,0],lam,
    {"penalized_error":pen,"bound_compat":lam**2*G2,"gap":lam**2*sum(1/t for t in ts),"phi2_S0":4/G2})
add("childparent-gamma","exact","children explain the parents: slow rate with zero compatibility",
    {"family":"ChildParentGamma","params":{"theta":.5,"gamma3":.6}},[1,.8,0,0],.05,
    {"penalized_error":4*.05*.8-2*.0025/.5,"prediction_error":2*.0025/.5,"phi2_S0":0.0,
     "lower_gamma3":4*.05*.6*.8})
add("childparent-sym","exact","irrepresentable children: bound too large by C^2/(C-1)^2",
    {"family":"ChildParentSym","params":{"theta":.8,"C":2}},[1,1,0,0],.1,
    {"beta_star":[.875,.875,0,0],"prediction_error":.025,"penalized_error":.025,"phi2_S0":.2,
     "bound_compat":.1,"gap_ratio":4.0})
add("childparent-ortho","exact","orthogonal children with uniform weights",
    {"family":"ChildParentOrthoInactive","params":{"C":1.2,"gamma":[.25,.25,.25,.25]}},[1,1,0,0,0,0],.1,
    {"prediction_error":.04/1.44,"penalized_error":.04/1.44,"phi2_S0":2*.04/4,"gap_ratio":1.44/.04})
ID={"family":"Custom","params":{"matrix":[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}}
add("coverage-empirical","coverage","first noisy bound, identity design, precondition violated by the stated lambda",
    ID,[1,.5,0,0],.6,{"min_coverage":.9,"precondition_holds":False},n=100,eta=.5,alpha=.05,alpha1=.05,trials=1000,seed=42)
add("coverage-empirical-admissible","coverage","first noisy bound with eta*lambda above lambda0",
    ID,[1,.5,0,0],.7,{"min_coverage":.9,"precondition_holds":True},n=100,eta=.5,alpha=.05,alpha1=.05,trials=1000,seed=42)
add("coverage-sigma0","coverage","second noisy bound with Sigma0 equal to the Gram matrix",
    ID,[1,.5,0,0],.7,{"min_coverage":.9,"xi":0.0},n=100,eta=.5,alpha=.05,alpha1=.05,trials=1000,seed=42,variant="sigma0")
add("pairblocks-three","exact","three blocks: prediction error adds up over blocks",
    {"family":"PairBlocks","params":{"rhos":[.5,.75,.2]}},[1,.8,1,.9,.5,.5],.05,
    {"prediction_error":2*.0025*(2+4+1.25),"penalized_error":2*.0025*(2+4+1.25),"bound_compat":2*.0025*(2+4+1.25)})
add("childparent-sym-c15","exact","irrepresentable children with C = 1.5: bound too large by 9",
    {"family":"ChildParentSym","params":{"theta":.6,"C":1.5}},[1,1,0,0],.05,
    {"prediction_error":2*.0025/.9,"penalized_error":2*.0025/.9,"phi2_S0":.1,"bound_compat":.05,"gap_ratio":9.0})
add("parentchild-c15","exact","one child with C = 1.5: gap equals lambda^2/tau^2",
    {"family":"ParentChildSingle","params":{"rho":.5,"C":1.5}},[1,1,0],.05,
    {"penalized_error":.0025*(4+1.25/.4375),"bound_compat":.0025*(4+2.25/.4375),"gap":.0025/.4375})
json.dump({"scenarios":sc},open(OUT, 'w'),indent=1)
print(len(sc))
